//! Command execution. Produces in-memory artifacts; nothing here touches
//! the file system.

use advdiff_core::contour::AccuracyProfile;
use advdiff_core::control::{ControlProblem, Precision};
use advdiff_core::direct::{philip_conductivity_with, Braester, SolutionGrid, Solver};
use advdiff_core::spectral::{find_roots, RootReport};
use advdiff_core::Robin;
use rayon::prelude::*;

use crate::config::{Command, ControlBlock, ProblemBlock, RunConfig};
use crate::output::{self, RootRow, SolutionRow, SweepRow, VerifyRow};
use crate::{parallel, CliError};

/// A named CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

/// Artifacts of a run plus per-entry failures. A run with failures still
/// writes its artifacts and exits with status 3.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub failures: Vec<String>,
    /// One-line human summary.
    pub summary: String,
}

impl Outcome {
    fn push(&mut self, prefix: &str, name: &str, contents: String) {
        self.artifacts.push(Artifact { name: format!("{prefix}{name}"), contents });
    }
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let profile = cfg.numerics.accuracy();
    let precision = cfg.numerics.precision();
    let prefix = cfg.output.prefix.as_str();
    match cfg.command {
        Command::Direct => direct(cfg, &profile, prefix),
        Command::Roots => roots(cfg, prefix),
        Command::Control => control(cfg, &profile, precision, prefix),
        Command::Verify => verify(cfg, &profile, prefix),
        Command::Sweep => sweep(cfg, &profile, precision, prefix),
    }
}

fn flagged(grid: &SolutionGrid) -> Vec<String> {
    let mut out = Vec::new();
    for (i, x) in grid.xs.iter().enumerate() {
        for (j, t) in grid.ts.iter().enumerate() {
            if !grid.converged[i][j] {
                out.push(format!("not converged at x={x}, t={t}"));
            }
        }
    }
    out
}

fn direct(cfg: &RunConfig, profile: &AccuracyProfile, prefix: &str) -> Result<Outcome, CliError> {
    let g = cfg.grid.as_ref().expect("validated");
    let params = cfg.problem.params()?;
    let xs = g.xs(params.length)?;
    if g.ts.iter().any(|t| t.is_nan() || *t < 0.0) {
        return Err(CliError::Config("grid times must be nonnegative".into()));
    }
    let (grid, t_scale, offset) = match &cfg.problem {
        ProblemBlock::Custom { .. } => {
            let solver = Solver::new(cfg.problem.ibvp()?, *profile).map_err(CliError::from_setup)?;
            (parallel::solve_grid(&solver, &xs, &g.ts), 1.0, 0.0)
        }
        ProblemBlock::Braester { flux } => {
            let b = Braester::rehovot(*flux, *profile).map_err(CliError::from_setup)?;
            // minutes in, seconds inside
            let ts: Vec<f64> = g.ts.iter().map(|t| 60.0 * t).collect();
            (parallel::solve_grid(b.solver(), &xs, &ts), 1.0 / 60.0, b.theta0)
        }
        ProblemBlock::Philip { rate, length } => {
            let grid = parallel::map_grid(&xs, &g.ts, |x, t| philip_conductivity_with(*rate, *length, x, t, profile));
            (grid, 1.0, 0.0)
        }
    };
    let mut out = Outcome { failures: flagged(&grid), ..Default::default() };
    out.summary = format!("direct: {} x {} grid, {} flagged", xs.len(), g.ts.len(), out.failures.len());
    out.push(prefix, "solution.csv", output::to_csv(&output::grid_rows(&grid, t_scale, offset))?);
    Ok(out)
}

fn report_for(problem: &ProblemBlock) -> Result<RootReport, CliError> {
    let p = problem.params()?;
    if matches!((p.alpha, p.beta), (Robin::Neumann, _) | (_, Robin::Neumann)) {
        return Ok(RootReport::line_only());
    }
    Ok(find_roots(&p)?)
}

fn roots(cfg: &RunConfig, prefix: &str) -> Result<Outcome, CliError> {
    let r = report_for(&cfg.problem)?;
    let row = RootRow::new(&r);
    let mut out = Outcome {
        summary: format!("roots: sigma={:?} rho={:?} predicted={:?} found={}", row.sigma, row.rho, row.predicted, row.count),
        ..Default::default()
    };
    out.push(prefix, "roots.csv", output::to_csv(&[row])?);
    Ok(out)
}

fn control_problem(cfg: &RunConfig, c: &ControlBlock) -> Result<ControlProblem, CliError> {
    ControlProblem::new(cfg.problem.params()?, cfg.problem.initial(), c.t_final, c.tau, c.n).map_err(CliError::from_setup)
}

fn control(cfg: &RunConfig, profile: &AccuracyProfile, precision: Precision, prefix: &str) -> Result<Outcome, CliError> {
    let c = cfg.control.as_ref().expect("validated");
    let problem = control_problem(cfg, c)?;
    let (sol, _) = parallel::synthesize(&problem, c.solve, profile, precision)?;
    let (_, grid) = parallel::verify(&problem, &sol.coeffs, profile)?;
    let mut out = Outcome {
        summary: format!(
            "control: N={} T={} |v|={} |theta(T)|={} cond={}",
            problem.n, problem.t_final, sol.control_norm, sol.verified_error, sol.condition_estimate
        ),
        ..Default::default()
    };
    out.push(prefix, "control_solution.csv", output::to_csv(&[SolutionRow::new(&problem, &sol)])?);
    out.push(prefix, "coefficients.csv", output::to_csv(&output::coeff_rows(&sol.coeffs))?);
    out.push(
        prefix,
        "control_series.csv",
        output::to_csv(&output::series_rows(&sol.coeffs, problem.tau, problem.t_final, c.series_points))?,
    );
    out.push(prefix, "final_profile.csv", output::to_csv(&output::profile_rows(&grid))?);
    Ok(out)
}

fn verify(cfg: &RunConfig, profile: &AccuracyProfile, prefix: &str) -> Result<Outcome, CliError> {
    let c = cfg.control.as_ref().expect("validated");
    let problem = control_problem(cfg, c)?;
    let coeffs = c.coeffs.as_ref().expect("validated");
    if coeffs.len() != problem.basis_count() {
        return Err(CliError::Config(format!("expected {} coefficients, got {}", problem.basis_count(), coeffs.len())));
    }
    let (err, grid) = parallel::verify(&problem, coeffs, profile)?;
    let mut out = Outcome { summary: format!("verify: |theta(T)|={err}"), ..Default::default() };
    out.push(prefix, "final_profile.csv", output::to_csv(&output::profile_rows(&grid))?);
    let row = VerifyRow {
        n: problem.n,
        t_final: problem.t_final,
        tau: problem.tau,
        control_norm: advdiff_core::control::norm_l2_time(coeffs, problem.tau, problem.t_final),
        verified_error: err,
    };
    out.push(prefix, "verification.csv", output::to_csv(&[row])?);
    Ok(out)
}

fn sweep(cfg: &RunConfig, profile: &AccuracyProfile, precision: Precision, prefix: &str) -> Result<Outcome, CliError> {
    let s = cfg.sweep.as_ref().expect("validated");
    if s.ns.is_empty() || s.t_finals.is_empty() {
        return Err(CliError::Config("sweep needs nonempty `ns` and `t_finals`".into()));
    }
    let params = cfg.problem.params()?;
    let initial = cfg.problem.initial();
    let mut problems = Vec::new();
    for &n in &s.ns {
        for &t in &s.t_finals {
            problems.push(ControlProblem::new(params, initial.clone(), t, s.tau, n).map_err(CliError::from_setup)?);
        }
    }
    let cells: Vec<SweepRow> = problems
        .par_iter()
        .map(|p| match parallel::synthesize(p, s.solve, profile, precision) {
            Ok((sol, _)) => SweepRow {
                n: p.n,
                t_final: p.t_final,
                control_norm: Some(sol.control_norm),
                verified_error: Some(sol.verified_error),
                residual_norm: Some(sol.residual_norm),
                condition: Some(sol.condition_estimate),
                delta: sol.delta,
                error: String::new(),
            },
            Err(e) => SweepRow {
                n: p.n,
                t_final: p.t_final,
                control_norm: None,
                verified_error: None,
                residual_norm: None,
                condition: None,
                delta: None,
                error: e.to_string(),
            },
        })
        .collect();
    let failures: Vec<String> =
        cells.iter().filter(|c| !c.error.is_empty()).map(|c| format!("N={} T={}: {}", c.n, c.t_final, c.error)).collect();
    let mut out = Outcome { summary: format!("sweep: {} cells, {} failed", cells.len(), failures.len()), failures, ..Default::default() };
    out.push(prefix, "sweep.csv", output::to_csv(&cells)?);
    out.push(prefix, "sweep_control_norm.csv", output::table_csv(&s.ns, &s.t_finals, &cells, |c| c.control_norm)?);
    out.push(prefix, "sweep_final_error.csv", output::table_csv(&s.ns, &s.t_finals, &cells, |c| c.verified_error)?);
    Ok(out)
}
