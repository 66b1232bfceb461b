//! Rayon-parallel versions of the row assembly, grid evaluation and
//! closed-loop verification. Results are collected in index order, so they
//! do not depend on the schedule.

use advdiff_core::contour::{AccuracyProfile, Contour};
use advdiff_core::control::{
    self, delta_for_target_error, norm_l2_space, solve_regularized, solve_stable, summarize, ControlProblem, ControlSolution,
    ControlSystem, Precision, VERIFY_POINTS,
};
use advdiff_core::direct::{evaluate_column, SolutionGrid, Solver};
use advdiff_core::extended::ExtendedAssembler;
use advdiff_core::{Error, Result};
use rayon::prelude::*;

use crate::config::SolveSpec;
use crate::{CliError, THREADS_ENV};

/// Sizes the global pool from [`THREADS_ENV`] when set.
pub fn init_threads() -> std::result::Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| CliError::Config(format!("{THREADS_ENV}={v:?} is not a thread count")))?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Collocation system with one task per row.
pub fn assemble(problem: &ControlProblem, profile: &AccuracyProfile, precision: Precision) -> Result<ControlSystem> {
    match precision {
        Precision::Double => {
            let asm = control::Assembler::new(problem, profile)?;
            let rows = problem.collocation_xs().par_iter().map(|&x| asm.row(x)).collect();
            asm.system_from_rows(rows)
        }
        Precision::Extended => {
            let asm = ExtendedAssembler::new(problem, &AccuracyProfile::extended())?;
            let rows = (0..problem.basis_count()).into_par_iter().map(|k| asm.row(k)).collect();
            asm.system_from_rows(rows)
        }
    }
}

/// Points per batch in [`solve_grid`]; fixed so results do not depend on
/// the thread count.
pub const CHUNK: usize = 32;

/// Evaluates `solver` on every `(x, t)` pair with one contour per time and
/// one task per chunk of [`CHUNK`] points.
pub fn solve_grid(solver: &Solver, xs: &[f64], ts: &[f64]) -> SolutionGrid {
    let contours: Vec<Result<Option<Contour>>> =
        ts.par_iter().map(|&t| if t > 0.0 { solver.contour(t, t).map(Some) } else { Ok(None) }).collect();
    let tasks: Vec<(usize, usize)> = (0..ts.len()).flat_map(|j| (0..xs.len()).step_by(CHUNK).map(move |i| (i, j))).collect();
    let vals: Vec<_> = tasks
        .par_iter()
        .map(|&(i, j)| {
            let chunk = &xs[i..(i + CHUNK).min(xs.len())];
            evaluate_column(solver, contours[j].as_ref().map(Option::as_ref), chunk, ts[j])
        })
        .collect();
    let mut grid = SolutionGrid::new(xs.to_vec(), ts.to_vec());
    for (&(i, j), v) in tasks.iter().zip(vals) {
        for (k, r) in v.into_iter().enumerate() {
            grid.set(i + k, j, r);
        }
    }
    grid
}

/// Applies `f` to every grid entry; failures are flagged per entry.
pub fn map_grid<F>(xs: &[f64], ts: &[f64], f: F) -> SolutionGrid
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    let cells: Vec<(usize, usize)> = (0..ts.len()).flat_map(|j| (0..xs.len()).map(move |i| (i, j))).collect();
    let vals: Vec<Result<f64>> = cells.par_iter().map(|&(i, j)| f(xs[i], ts[j])).collect();
    let mut grid = SolutionGrid::new(xs.to_vec(), ts.to_vec());
    for (&(i, j), v) in cells.iter().zip(vals) {
        match v {
            Ok(v) => {
                grid.values[i][j] = v;
                grid.imag[i][j] = 0.0;
                grid.converged[i][j] = v.is_finite();
            }
            Err(_) => grid.converged[i][j] = false,
        }
    }
    grid
}

/// Parallel [`control::verify_control`].
pub fn verify(problem: &ControlProblem, coeffs: &[f64], profile: &AccuracyProfile) -> Result<(f64, SolutionGrid)> {
    let solver = Solver::new(problem.controlled_spec(coeffs)?, *profile)?;
    let l = problem.params.length;
    let xs: Vec<f64> = (0..VERIFY_POINTS).map(|i| l * i as f64 / (VERIFY_POINTS - 1) as f64).collect();
    let grid = solve_grid(&solver, &xs, &[problem.t_final]);
    if !grid.all_converged() {
        let bad = grid.converged.iter().filter(|r| !r[0]).count();
        return Err(Error::NotConverged { change: bad as f64, tolerance: 0.0 });
    }
    Ok((norm_l2_space(&grid.column(0), l), grid))
}

/// Assembles, solves as requested and verifies.
pub fn synthesize(
    problem: &ControlProblem,
    solve: SolveSpec,
    profile: &AccuracyProfile,
    precision: Precision,
) -> Result<(ControlSolution, ControlSystem)> {
    let system = assemble(problem, profile, precision)?;
    let sol = solve_system(problem, &system, solve, profile)?;
    Ok((sol, system))
}

/// Solves an assembled system as requested and verifies the result.
pub fn solve_system(
    problem: &ControlProblem,
    system: &ControlSystem,
    solve: SolveSpec,
    profile: &AccuracyProfile,
) -> Result<ControlSolution> {
    let (coeffs, delta) = match solve {
        SolveSpec::Exact => match &system.extended {
            Some(rows) => (rows.solve()?, None),
            None => (solve_stable(&system.a, &system.b)?.0, None),
        },
        SolveSpec::Delta(d) => (solve_regularized(&system.a, &system.b, d)?, Some(d)),
        SolveSpec::TargetError(target) => return Ok(delta_for_target_error(problem, system, target, profile)?.1),
    };
    let (err, _) = verify(problem, &coeffs, profile)?;
    Ok(summarize(problem, system, coeffs, delta, err))
}
