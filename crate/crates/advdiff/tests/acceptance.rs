//! Reproduction run: every criterion prints its diagnostics followed by
//! one `criterion k ... PASS|FAIL` line. Exits nonzero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use advdiff::config::SolveSpec;
use advdiff::parallel;
use advdiff_core::contour::AccuracyProfile;
use advdiff_core::control::{solve_regularized, Assembler, ControlProblem, ControlSolution, ControlSystem, Precision};
use advdiff_core::direct::{philip_conductivity, solve_dd, solve_rd, BcKind, Braester, IbvpSpec, Solver};
use advdiff_core::linalg::norm2;
use advdiff_core::spectral::{delta_rr, find_roots};
use advdiff_core::transforms::{BoundarySignal, InitialData};
use advdiff_core::{ProblemParams, C64};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const TS: [f64; 3] = [0.5, 1.0, 2.0];

// rows N, columns T = 1/2, 1, 2
const TABLE1: [[f64; 3]; 3] = [[0.346233, 0.108330, 0.012763], [0.48019, 0.170745, 0.030665], [0.595987, 0.223610, 0.050358]];
const TABLE2: [[f64; 3]; 3] =
    [[5.816169e-5, 4.749178e-7, 1.290414e-9], [1.621817e-8, 1.012742e-11, 2.673885e-15], [1.340275e-12, 5.966348e-17, 1.262254e-21]];
const TABLE3: [[f64; 3]; 3] = [[198369.0, 2746.9, 195.0], [384725.0, 4020.3, 242.0], [702459.0, 5702.6, 295.5]];
const TABLE5: [[f64; 3]; 3] =
    [[5.527160e-2, 3.094840e-3, 3.353640e-6], [9.95742e-2, 1.004530e-2, 4.296490e-5], [1.409660e-1, 1.963610e-2, 2.074790e-4]];
const TABLE6: [[f64; 3]; 3] =
    [[1.752254e-6, 2.309529e-9, 5.618245e-14], [3.517729e-10, 5.396213e-14, 3.264470e-19], [2.144497e-14, 2.944358e-19, 2.774625e-25]];
/// `(N, exact, regularized, change %, final error)`.
const TABLE7: [(usize, f64, f64, f64, f64); 3] =
    [(12, 2746.9, 388.5, -85.9, 5.237347e-3), (14, 4020.3, 373.6, -90.7, 9.039701e-3), (16, 5702.6, 370.5, -93.5, 6.922691e-3)];
const TABLE8: [(usize, f64, f64, f64, f64); 3] =
    [(12, 714.8, 53.9, -92.5, 7.671623e-3), (22, 9436.0, 52.2, -99.5, 9.345277e-3), (32, 65118.3, 51.9, -99.9, 9.156095e-3)];

struct Cell {
    problem: ControlProblem,
    sol: ControlSolution,
    system: ControlSystem,
}

type Outcome = Result<(bool, String), String>;

struct Report {
    failed: usize,
}

impl Report {
    fn record(&mut self, k: usize, name: &str, log: &[String], out: Outcome) {
        for line in log {
            println!("    {line}");
        }
        let (pass, detail) = out.unwrap_or_else(|e| (false, format!("error: {e}")));
        if !pass {
            self.failed += 1;
        }
        println!("criterion {k} {name}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    }
}

fn profile() -> AccuracyProfile {
    AccuracyProfile::paper()
}

fn example1() -> (ProblemParams, InitialData) {
    (ProblemParams::new(1.0, 0.5, 1.0, 1.0, 0.0).unwrap(), InitialData::PiecewiseStep { height: 1.0, split: 0.5 })
}

fn example2() -> (ProblemParams, InitialData) {
    (ProblemParams::new(0.1, 0.5, 1.0, 1.0, 0.0).unwrap(), InitialData::HalfCosine)
}

fn example3() -> (ProblemParams, InitialData) {
    (ProblemParams::new(1.0, 0.0, 1.0, 0.0, 0.0).unwrap(), InitialData::FullSine)
}

fn exact_cells(ex: (ProblemParams, InitialData), ns: &[usize], ts: &[f64]) -> Result<Vec<Cell>, String> {
    let mut cells = Vec::new();
    for &n in ns {
        for &t in ts {
            let problem = ControlProblem::new(ex.0, ex.1.clone(), t, 0.0, n).map_err(|e| e.to_string())?;
            let (sol, system) = parallel::synthesize(&problem, SolveSpec::Exact, &profile(), Precision::Extended)
                .map_err(|e| format!("N={n} T={t}: {e}"))?;
            cells.push(Cell { problem, sol, system });
        }
    }
    Ok(cells)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Control norms against a 3 x 3 table; returns the worst relative error
/// over the cells with `T` in `ts`.
fn norms_vs(cells: &[Cell], table: &[[f64; 3]; 3], ts: &[f64], log: &mut Vec<String>) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, c) in cells.iter().enumerate() {
        let want = table[k / 3][k % 3];
        let e = rel(c.sol.control_norm, want);
        log.push(format!(
            "N={:<2} T={:<4} |v|={:<14.7e} table={:<12.6e} rel={:.2e} cond={:.2e}",
            c.problem.n, c.problem.t_final, c.sol.control_norm, want, e, c.sol.condition_estimate
        ));
        if ts.contains(&c.problem.t_final) {
            worst = worst.max(e);
        }
    }
    worst
}

/// Final errors against `max(10 x table, 1e-13)`; returns the number of
/// violating cells.
fn errors_vs(cells: &[Cell], table: &[[f64; 3]; 3], log: &mut Vec<String>) -> usize {
    let mut bad = 0;
    for (k, c) in cells.iter().enumerate() {
        let want = table[k / 3][k % 3];
        let bound = (10.0 * want).max(1e-13);
        let ok = c.sol.verified_error <= bound;
        bad += usize::from(!ok);
        log.push(format!(
            "N={:<2} T={:<4} |theta(T)|={:<12.4e} table={:<12.4e} bound={:.1e} {}",
            c.problem.n,
            c.problem.t_final,
            c.sol.verified_error,
            want,
            bound,
            if ok { "ok" } else { "over" }
        ));
    }
    bad
}

fn criterion1(cells: &Result<Vec<Cell>, String>, secs: f64, log: &mut Vec<String>) -> Outcome {
    let cells = cells.as_ref().map_err(Clone::clone)?;
    let worst = norms_vs(cells, &TABLE1, &TS, log);
    Ok((worst <= 0.02 && secs < 60.0, format!("worst rel {worst:.2e} <= 2e-2, {secs:.1} s < 60 s")))
}

fn criterion2(cells: &Result<Vec<Cell>, String>, log: &mut Vec<String>) -> Outcome {
    let cells = cells.as_ref().map_err(Clone::clone)?;
    let bad = errors_vs(cells, &TABLE2, log);
    // T = 1 column, N = 2, 4, 6
    let e: Vec<f64> = (0..3).map(|i| cells[3 * i + 1].sol.verified_error).collect();
    let drops = [e[0] / e[1], e[1] / e[2]];
    log.push(format!("T=1 decay factors N=2->4 {:.2e}, N=4->6 {:.2e}", drops[0], drops[1]));
    let decay = drops.iter().all(|d| *d >= 100.0);
    Ok((bad == 0 && decay, format!("{bad} cells over bound, two-decade decay {}", if decay { "holds" } else { "broken" })))
}

fn criterion3(log: &mut Vec<String>) -> Outcome {
    let cells = exact_cells(example3(), &[2, 4, 6], &TS)?;
    let worst = norms_vs(&cells, &TABLE5, &TS, log);
    let bad = errors_vs(&cells, &TABLE6, log);
    Ok((worst <= 0.02 && bad == 0, format!("worst norm rel {worst:.2e} <= 2e-2, {bad} error cells over bound")))
}

fn criterion4(cells: &Result<Vec<Cell>, String>, log: &mut Vec<String>) -> Outcome {
    let cells = cells.as_ref().map_err(Clone::clone)?;
    let worst_long = norms_vs(cells, &TABLE3, &[1.0, 2.0], log);
    let worst_short = (0..3)
        .map(|i| {
            let (got, want) = (cells[3 * i].sol.control_norm, TABLE3[i][0]);
            (got / want).max(want / got)
        })
        .fold(0.0, f64::max);
    Ok((
        worst_long <= 0.10 && worst_short <= 2.0,
        format!("T in {{1,2}} worst rel {worst_long:.2e} <= 0.1, T=1/2 worst factor {worst_short:.3} <= 2"),
    ))
}

/// Regularized rows: `|v_R|` within 25 %, change within 5 points.
fn regularized_rows(cells: &[&Cell], table: &[(usize, f64, f64, f64, f64); 3], log: &mut Vec<String>) -> Result<bool, String> {
    let mut ok = true;
    for (c, &(n, _, want_norm, want_change, target)) in cells.iter().zip(table) {
        let sol =
            parallel::solve_system(&c.problem, &c.system, SolveSpec::TargetError(target), &profile()).map_err(|e| format!("N={n}: {e}"))?;
        let change = 100.0 * (sol.control_norm / c.sol.control_norm - 1.0);
        let (e_norm, e_change) = (rel(sol.control_norm, want_norm), (change - want_change).abs());
        let row_ok = e_norm <= 0.25 && e_change <= 5.0;
        ok &= row_ok;
        log.push(format!(
            "N={n:<2} T={} exact={:.1} |v_R|={:.1} (table {want_norm}, rel {e_norm:.3}) change={change:.1}% (table {want_change}%) delta={:.3e} |theta_R|={:.3e} {}",
            c.problem.t_final,
            c.sol.control_norm,
            sol.control_norm,
            sol.delta.unwrap_or(f64::NAN),
            sol.verified_error,
            if row_ok { "ok" } else { "off" }
        ));
    }
    Ok(ok)
}

/// `|c(delta)|` is nonincreasing on a log grid over `[1e-6, 1e-1]`.
fn norm_monotone(c: &Cell, log: &mut Vec<String>) -> Result<bool, String> {
    let mut prev = f64::INFINITY;
    let mut ok = true;
    for k in 0..=40 {
        let d = 1e-6 * 10f64.powf(5.0 * k as f64 / 40.0);
        let s = norm2(&solve_regularized(&c.system.a, &c.system.b, d).map_err(|e| e.to_string())?);
        if s > prev {
            ok = false;
            log.push(format!("N={} T={}: |c| rises from {prev:e} to {s:e} at delta={d:e}", c.problem.n, c.problem.t_final));
        }
        prev = s;
    }
    Ok(ok)
}

fn criterion5(ex2: &Result<Vec<Cell>, String>, log: &mut Vec<String>) -> Outcome {
    let ex2 = ex2.as_ref().map_err(Clone::clone)?;
    let t1: Vec<&Cell> = ex2.iter().filter(|c| c.problem.t_final == 1.0).collect();
    let ok7 = regularized_rows(&t1, &TABLE7, log)?;
    let ns: Vec<usize> = TABLE8.iter().map(|r| r.0).collect();
    let ex4 = exact_cells(example3(), &ns, &[0.05])?;
    let refs: Vec<&Cell> = ex4.iter().collect();
    let ok8 = regularized_rows(&refs, &TABLE8, log)?;
    let mono = [t1[0], refs[0], refs[2]].iter().map(|c| norm_monotone(c, log)).collect::<Result<Vec<_>, _>>()?;
    let mono = mono.iter().all(|m| *m);
    Ok((
        ok7 && ok8 && mono,
        format!(
            "table 7 rows {}, table 8 rows {}, |c(delta)| monotone {}",
            if ok7 { "ok" } else { "off" },
            if ok8 { "ok" } else { "off" },
            if mono { "yes" } else { "no" }
        ),
    ))
}

fn spec(p: ProblemParams, ic: InitialData, f: f64, g: f64, kind: BcKind) -> Result<IbvpSpec, String> {
    IbvpSpec::new(p, ic, BoundarySignal::Constant(f), BoundarySignal::Constant(g), kind).map_err(|e| e.to_string())
}

fn criterion6(log: &mut Vec<String>) -> Outcome {
    let mut rng = StdRng::seed_from_u64(2024);
    let heat = spec(ProblemParams::new(1.0, 0.0, 1.0, 0.0, 0.0).unwrap(), InitialData::FullSine, 0.0, 0.0, BcKind::DirichletDirichlet)?;
    let adv = spec(
        ProblemParams::new(1.0, 1.0, 1.0, 0.0, 0.0).unwrap(),
        InitialData::ExpSine { rate: 0.5, mode: 1 },
        0.0,
        0.0,
        BcKind::DirichletDirichlet,
    )?;
    let (mut e_heat, mut e_adv): (f64, f64) = (0.0, 0.0);
    for _ in 0..50 {
        let x: f64 = rng.gen_range(0.0..1.0);
        let t: f64 = rng.gen_range(0.01..1.0);
        let want = (-PI * PI * t).exp() * (PI * x).sin();
        e_heat = e_heat.max((solve_dd(&heat, x, t).map_err(|e| e.to_string())? - want).abs());
        let want = (0.5 * x).exp() * (PI * x).sin() * (-(PI * PI + 0.25) * t).exp();
        e_adv = e_adv.max((solve_dd(&adv, x, t).map_err(|e| e.to_string())? - want).abs());
    }
    log.push(format!("heat mode max abs error {e_heat:.2e}, advection mode max abs error {e_adv:.2e}"));
    Ok((e_heat <= 1e-8 && e_adv <= 1e-7, format!("heat {e_heat:.1e} <= 1e-8, advection {e_adv:.1e} <= 1e-7")))
}

fn criterion7(log: &mut Vec<String>) -> Outcome {
    // constant-flux column, times in minutes
    let b = Braester::rehovot(0.3e-3, profile()).map_err(|e| e.to_string())?;
    let xs: Vec<f64> = (0..=60).map(f64::from).collect();
    let mut worst_init: f64 = 0.0;
    for &x in &xs {
        worst_init = worst_init.max((b.value(x, 0.0).map_err(|e| e.to_string())? - 0.065).abs());
    }
    let mut worst_base: f64 = 0.0;
    let mut monotone = true;
    let mut prev: Option<Vec<f64>> = None;
    for m in [30.0, 60.0, 120.0] {
        let col = xs.iter().map(|&x| b.value(x, 60.0 * m)).collect::<Result<Vec<f64>, _>>().map_err(|e| e.to_string())?;
        worst_base = worst_base.max((col[60] - 0.397).abs());
        if let Some(p) = &prev {
            monotone &= p.iter().zip(&col).all(|(a, c)| *c >= a - 1e-12);
        }
        log.push(format!("braester t={m} min: theta(0)={:.6} theta(30)={:.6} theta(60)={:.6}", col[0], col[30], col[60]));
        prev = Some(col);
    }
    let braester = worst_init <= 1e-6 && worst_base <= 1e-6 && monotone;
    log.push(format!("braester |theta(x,0)-0.065| {worst_init:.1e}, |theta(L,t)-0.397| {worst_base:.1e}, monotone in t {monotone}"));

    let (l, k1) = (0.05, 1.0);
    let n = 51;
    let xs: Vec<f64> = (0..n).map(|i| l * i as f64 / (n - 1) as f64).collect();
    let err = |e: advdiff_core::Error| e.to_string();
    let mut zero_start = true;
    for &x in &xs {
        zero_start &= philip_conductivity(1.6, l, x, 0.0).map_err(err)? == 0.0;
    }
    let mut decreasing = true;
    for ratio in [1.6, 2.3] {
        let r = ratio * k1;
        let t = l * k1 / r;
        let prof = xs.iter().map(|&x| philip_conductivity(r, l, x, t)).collect::<Result<Vec<f64>, _>>().map_err(err)?;
        let rises: Vec<usize> = (1..n).filter(|&i| prof[i] > prof[i - 1]).collect();
        decreasing &= rises.is_empty();
        let imin = (0..n).min_by(|&a, &b| prof[a].total_cmp(&prof[b])).unwrap_or(0);
        log.push(format!(
            "philip R/K1={ratio}: K(0)={:.5} K(L)={:.5} min {:.5} at x={:.4}, {} rising steps",
            prof[0],
            prof[n - 1],
            prof[imin],
            xs[imin],
            rises.len()
        ));
    }
    let mut linear = true;
    for t in [0.01, 0.02, 0.05] {
        for &x in &xs {
            let (a, c) = (philip_conductivity(1.6, l, x, t).map_err(err)?, philip_conductivity(2.3, l, x, t).map_err(err)?);
            linear &= (c * 1.6 - a * 2.3).abs() <= 4.0 * f64::EPSILON * (c * 1.6).abs();
        }
    }
    log.push(format!("philip K(x,0)=0 {zero_start}, linear in R {linear}, decreasing in x {decreasing}"));
    let pass = braester && zero_start && linear && decreasing;
    Ok((
        pass,
        format!(
            "braester {}, philip zero start {zero_start}, linear {linear}, decreasing {decreasing}",
            if braester { "ok" } else { "off" }
        ),
    ))
}

/// Winding number of `f` around zero along the closed polygon `pts`.
fn winding(f: &dyn Fn(C64) -> C64, pts: &[C64]) -> f64 {
    fn seg(f: &dyn Fn(C64) -> C64, a: C64, b: C64, fa: C64, fb: C64, depth: u32) -> f64 {
        let d = (fb / fa).arg();
        if d.abs() < 0.2 || depth > 40 {
            return d;
        }
        let m = (a + b) * 0.5;
        let fm = f(m);
        seg(f, a, m, fa, fm, depth + 1) + seg(f, m, b, fm, fb, depth + 1)
    }
    let mut total = 0.0;
    for k in 0..pts.len() {
        let (a, b) = (pts[k], pts[(k + 1) % pts.len()]);
        for j in 0..400 {
            let za = a + (b - a) * (j as f64 / 400.0);
            let zb = a + (b - a) * ((j + 1) as f64 / 400.0);
            total += seg(f, za, zb, f(za), f(zb), 0);
        }
    }
    total / (2.0 * PI)
}

/// Root counts on a 5 x 5 `(alpha, beta)` grid against the winding number of
/// `Delta` on rectangles either side of `Im lambda = -kappa`.
fn root_grid(d0: f64, k0: f64, l: f64, grid: [f64; 5], log: &mut Vec<String>) -> Result<bool, String> {
    let kappa = k0 / (2.0 * d0);
    let mut ok = true;
    let mut counts = std::collections::BTreeMap::new();
    for &a in &grid {
        for &b in &grid {
            let p = ProblemParams::new(d0, k0, l, a, b).map_err(|e| e.to_string())?;
            let rep = find_roots(&p).map_err(|e| format!("alpha={a} beta={b}: {e}"))?;
            let f = |z: C64| delta_rr(z, &p).unwrap_or(C64::new(f64::NAN, f64::NAN));
            let mut w = 0.0;
            for (lo, hi) in [(-kappa + 1e-3, -kappa + 6.0), (-kappa - 6.0, -kappa - 1e-3)] {
                w += winding(&f, &[C64::new(-1.0, lo), C64::new(1.0, lo), C64::new(1.0, hi), C64::new(-1.0, hi)]);
            }
            let n = w.round();
            let cell_ok = (w - n).abs() < 1e-6 && rep.roots.len() == n as usize && rep.predicted_count.is_none_or(|c| c == n as usize);
            if !cell_ok {
                log.push(format!("alpha={a} beta={b}: winding {w}, found {}, predicted {:?}", rep.roots.len(), rep.predicted_count));
            }
            ok &= cell_ok;
            *counts.entry(rep.roots.len()).or_insert(0) += 1;
        }
    }
    log.push(format!("D0={d0} K0={k0} L={l} grid {grid:?}: cells per root count {counts:?}"));
    Ok(ok)
}

fn criterion8(log: &mut Vec<String>) -> Outcome {
    // contour independence
    let p = ProblemParams::new(1.0, 0.5, 1.0, 1.0, 0.0).unwrap();
    let s = spec(p, InitialData::PiecewiseStep { height: 1.0, split: 0.5 }, 0.25, -0.4, BcKind::RobinDirichlet)?;
    let base = AccuracyProfile::default();
    let profiles = [
        base,
        AccuracyProfile { ray_angle: PI / 6.0, ..base },
        AccuracyProfile { ray_angle: PI / 12.0, offset: 0.9, ..base },
        AccuracyProfile { offset: 1.4, ..base },
        AccuracyProfile { ray_angle: PI / 5.0, offset: 0.3, ..base },
    ];
    let mut spread: f64 = 0.0;
    for (x, t) in [(0.0, 0.2), (0.35, 0.05), (0.8, 1.0)] {
        let vals = profiles
            .iter()
            .map(|pr| Solver::new(s.clone(), *pr).and_then(|sv| sv.evaluate(x, t)?.checked()))
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| e.to_string())?;
        spread = spread.max(vals.iter().map(|v| (v - vals[0]).abs()).fold(0.0, f64::max));
    }
    log.push(format!("contour independence: max spread {spread:.2e}"));

    // superposition: free response minus basis responses equals the controlled solution
    let (p1, ic1) = example1();
    let pr = ControlProblem::new(p1, ic1, 0.5, 0.0, 3).map_err(|e| e.to_string())?;
    let asm = Assembler::new(&pr, &base).map_err(|e| e.to_string())?;
    let coeffs = [0.4, -1.3, 0.25, 0.9];
    let controlled = pr.controlled_spec(&coeffs).map_err(|e| e.to_string())?;
    let mut sup: f64 = 0.0;
    for x in pr.collocation_xs() {
        let row = asm.row(x).map_err(|e| e.to_string())?;
        let predicted = row[4] - (0..4).map(|k| coeffs[k] * row[k]).sum::<f64>();
        sup = sup.max((predicted - solve_rd(&controlled, x, 0.5).map_err(|e| e.to_string())?).abs());
    }
    log.push(format!("superposition: max deviation {sup:.2e}"));

    // boundary recovery: Robin residual by one-sided differences, Dirichlet value directly
    let (alpha, f, g) = (0.7, 0.3, -0.2);
    let sb = spec(ProblemParams::new(1.0, 0.5, 1.0, alpha, 0.0).unwrap(), InitialData::HalfCosine, f, g, BcKind::RobinDirichlet)?;
    let (mut robin, mut dirichlet): (f64, f64) = (0.0, 0.0);
    let h = 1e-3;
    for t in [0.05, 0.3, 1.0] {
        let th = |x: f64| solve_rd(&sb, x, t).map_err(|e| e.to_string());
        let (u0, u1, u2) = (th(0.0)?, th(h)?, th(2.0 * h)?);
        let ux = (-3.0 * u0 + 4.0 * u1 - u2) / (2.0 * h);
        robin = robin.max((u0 - alpha * ux - f).abs());
        dirichlet = dirichlet.max((th(1.0)? - g).abs());
    }
    log.push(format!("boundary recovery: robin residual {robin:.2e}, dirichlet error {dirichlet:.2e}"));

    let roots_a = root_grid(1.0, 0.5, 8.0, [0.0, 0.5, 1.0, 1.5, 2.0], log)?;
    let roots_b = root_grid(1.0, 1.0, 8.0, [0.0, 0.3, 0.9, 3.0, 6.0], log)?;
    let pass = spread <= 1e-8 && sup <= 1e-6 && robin <= 1e-4 && dirichlet <= 1e-6 && roots_a && roots_b;
    Ok((
        pass,
        format!(
            "contours {spread:.1e} <= 1e-8, superposition {sup:.1e} <= 1e-6, robin {robin:.1e} <= 1e-4, dirichlet {dirichlet:.1e} <= 1e-6, root grids {}",
            if roots_a && roots_b { "agree" } else { "disagree" }
        ),
    ))
}

fn main() -> ExitCode {
    // `cargo test` passes its own flags; a name filter other than ours skips the run
    if std::env::args().skip(1).any(|a| !a.starts_with('-') && !"acceptance".contains(a.as_str())) {
        return ExitCode::SUCCESS;
    }
    let mut report = Report { failed: 0 };
    let mut log = Vec::new();

    let start = Instant::now();
    let ex1 = exact_cells(example1(), &[2, 4, 6], &TS);
    let secs = start.elapsed().as_secs_f64();
    let out = criterion1(&ex1, secs, &mut log);
    report.record(1, "example 1 control norms", &log, out);
    log.clear();
    let out = criterion2(&ex1, &mut log);
    report.record(2, "example 1 final errors", &log, out);
    log.clear();
    let out = criterion3(&mut log);
    report.record(3, "heat equation control", &log, out);
    log.clear();
    let ex2 = exact_cells(example2(), &[12, 14, 16], &TS);
    let out = criterion4(&ex2, &mut log);
    report.record(4, "ill-conditioned example 2", &log, out);
    log.clear();
    let out = criterion5(&ex2, &mut log);
    report.record(5, "regularized controls", &log, out);
    log.clear();
    let out = criterion6(&mut log);
    report.record(6, "direct solver modes", &log, out);
    log.clear();
    let out = criterion7(&mut log);
    report.record(7, "scenario presets", &log, out);
    log.clear();
    let out = criterion8(&mut log);
    report.record(8, "structural properties", &log, out);

    println!("acceptance: {} of 8 criteria passed", 8 - report.failed);
    if report.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
