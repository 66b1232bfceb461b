//! Boundary null control at `x = L`.
//!
//! The control is `v(t) = Σ_{n=1}^{N+1} c_n φ_n(t)` with the half-range sine
//! basis on `[τ, T]`. Requiring `θ(x_k, T) = 0` at `N + 1` interior points
//! gives the collocation system `A c = b` with `A_{kn} = A_n(x_k, T)` and
//! `b_k = B(x_k, T)`, where `θ(x, T) = B(x, T) − Σ c_n A_n(x, T)`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::contour::{self, AccuracyProfile, Contour, Part};
use crate::direct::{real_line_term, solve_grid, BcKind, IbvpSpec, SolutionGrid, Solver, IMAG_TOL};
use crate::extended::{ExtendedAssembler, ExtendedRows};
use crate::linalg::{self, lu_solve, Matrix, Svd};
use crate::math::{self, C64, I, PI};
use crate::params::{ProblemParams, Robin};
use crate::quad;
use crate::spectral::{self, f_gamma_scaled, nu, omega, sin_scaled, wave, RootReport};
use crate::transforms::{phi_n, resonance_radius, varphi_n_algebraic, varphi_n_damped, BoundarySignal, InitialData};
use crate::{Error, Result};

/// Condition number above which solves switch to the SVD path.
pub const SVD_SWITCH: f64 = 1e12;
/// Grid size for the final-state norm.
pub const VERIFY_POINTS: usize = 201;
/// Relative accuracy of the discrepancy match.
pub const DISCREPANCY_TOL: f64 = 1e-6;

/// Null-control problem for the Robin–Dirichlet (or Dirichlet–Dirichlet)
/// system with homogeneous data at `x = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlProblem {
    pub params: ProblemParams,
    pub initial: InitialData,
    pub t_final: f64,
    pub tau: f64,
    pub n: usize,
}

impl ControlProblem {
    pub fn new(params: ProblemParams, initial: InitialData, t_final: f64, tau: f64, n: usize) -> Result<Self> {
        let p = ControlProblem { params, initial, t_final, tau, n };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.initial.validate(self.params.length)?;
        if self.params.beta != Robin::Coefficient(0.0) {
            return Err(Error::InvalidParams("control acts through a Dirichlet datum: beta must be 0".into()));
        }
        if self.params.alpha.is_neumann() {
            return Err(Error::NeumannNotAllowed);
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidParams(format!("final time must be positive, got {}", self.t_final)));
        }
        if !(self.tau >= 0.0 && self.tau < self.t_final) {
            return Err(Error::InvalidParams(format!("activation time {} outside [0, {})", self.tau, self.t_final)));
        }
        if self.n == 0 {
            return Err(Error::InvalidParams("N must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of basis functions and collocation points, `N + 1`.
    pub fn basis_count(&self) -> usize {
        self.n + 1
    }

    /// `x_k = (k + 1) L / (N + 2)`, `k = 0..=N`.
    pub fn collocation_xs(&self) -> Vec<f64> {
        let l = self.params.length;
        (0..=self.n).map(|k| (k + 1) as f64 * l / (self.n + 2) as f64).collect()
    }

    fn kind(&self) -> BcKind {
        if self.params.alpha == Robin::Coefficient(0.0) {
            BcKind::DirichletDirichlet
        } else {
            BcKind::RobinDirichlet
        }
    }

    /// Uncontrolled problem: `f = g = 0`.
    pub fn free_spec(&self) -> Result<IbvpSpec> {
        IbvpSpec::new(self.params, self.initial.clone(), BoundarySignal::zero(), BoundarySignal::zero(), self.kind())
    }

    /// Closed-loop problem with `g = Σ c_n φ_n`.
    pub fn controlled_spec(&self, coeffs: &[f64]) -> Result<IbvpSpec> {
        if coeffs.len() != self.basis_count() {
            return Err(Error::InvalidParams(format!("expected {} coefficients, got {}", self.basis_count(), coeffs.len())));
        }
        let g = BoundarySignal::sine_series(coeffs.to_vec(), self.tau, self.t_final)?;
        IbvpSpec::new(self.params, self.initial.clone(), BoundarySignal::zero(), g, self.kind())
    }
}

/// Result of a control synthesis.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSolution {
    pub coeffs: Vec<f64>,
    pub control_norm: f64,
    pub residual_norm: f64,
    pub verified_error: f64,
    pub regularized: bool,
    pub delta: Option<f64>,
    pub condition_estimate: f64,
}

/// Collocation matrix, right-hand side and `κ(A)`.
///
/// `extended` keeps the double-double entries when the system was assembled
/// with [`Precision::Extended`]; exact solves then use them.
#[derive(Debug, Clone)]
pub struct ControlSystem {
    pub a: Matrix,
    pub b: Vec<f64>,
    pub condition: f64,
    pub extended: Option<ExtendedRows>,
}

/// Arithmetic for assembling and exactly solving the collocation system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    #[default]
    Double,
    /// Double-double rows on [`AccuracyProfile::extended`] settings and an LU
    /// solve in the same arithmetic. Needed once `κ(A)` approaches `10¹⁶`.
    Extended,
}

impl Precision {
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "double" => Some(Precision::Double),
            "extended" => Some(Precision::Extended),
            _ => None,
        }
    }
}

/// Evaluates `A_n(x, T)` and `B(x, T)` on one contour shared by all rows.
#[derive(Debug, Clone)]
pub struct Assembler {
    problem: ControlProblem,
    contour: Contour,
    profile: AccuracyProfile,
}

impl Assembler {
    pub fn new(problem: &ControlProblem, profile: &AccuracyProfile) -> Result<Self> {
        problem.validate()?;
        let p = &problem.params;
        let roots: RootReport = spectral::find_roots(p)?;
        let span = problem.t_final - problem.tau;
        let freq = problem.basis_count() as f64 * PI / span;
        let min_s = 1.5 * resonance_radius(freq, p) + 1.0;
        let contour = contour::make_tailed_contour(p, &roots, span, problem.t_final, min_s, profile)?;
        Ok(Assembler { problem: problem.clone(), contour, profile: *profile })
    }

    pub fn problem(&self) -> &ControlProblem {
        &self.problem
    }

    pub fn contour(&self) -> &Contour {
        &self.contour
    }

    /// `[A_1(x, T), …, A_{N+1}(x, T), B(x, T)]`.
    pub fn row(&self, x: f64) -> Result<Vec<f64>> {
        let pr = &self.problem;
        let p = &pr.params;
        let l = p.length;
        if !(x > 0.0 && x < l) {
            return Err(Error::InvalidParams(format!("collocation point {x} not inside (0, {l})")));
        }
        let a = p.alpha.finite()?;
        let (t, tau) = (pr.t_final, pr.tau);
        let nb = pr.basis_count();
        let kappa = p.kappa();
        let has_initial = !pr.initial.is_zero();
        let one = C64::new(1.0, 0.0);
        let vals = contour::integrate_parts(&self.contour, nb + 1, |lam, part, out| {
            let m = lam + I * kappa;
            let n = nu(lam, p);
            let w = omega(lam, p);
            let den = (one - I * a * lam) - wave(m, l) * (one - I * a * n);
            let fa = f_gamma_scaled(m, wave(m, x), x, a, kappa);
            let right_phase = (I * (lam + I * (2.0 * kappa)) * (l - x)).exp();
            let flux = C64::new(p.k0, 0.0) - I * lam * (2.0 * p.d0);
            let common = right_phase * fa / den;
            for k in 0..nb {
                let phi = match part {
                    Part::Ray => varphi_n_damped(w, t, k + 1, tau, t),
                    Part::Tail => varphi_n_algebraic(w, t, k + 1, tau, t),
                };
                out[k] = common * flux * phi;
            }
            if has_initial && part == Part::Ray {
                let decay = (-w * t).exp();
                let sn = sin_scaled(wave(m, l - x), l - x);
                let left_phase = (I * lam * x).exp();
                out[nb] =
                    decay * (common * pr.initial.hat_right(lam, l) - left_phase * sn * (one - I * a * n) * pr.initial.hat(n, l) / den);
            }
        })?;
        let mut row = Vec::with_capacity(nb + 1);
        for (k, v) in vals.iter().enumerate() {
            let mut z = *v * (-I / PI);
            if k == nb {
                z += real_line_term(p, &pr.initial, x, t, &self.profile)?;
            }
            if math::abs(z.im) > IMAG_TOL * (1.0 + z.re.abs()) {
                return Err(Error::NotConverged { change: z.im.abs(), tolerance: IMAG_TOL * (1.0 + z.re.abs()) });
            }
            row.push(z.re);
        }
        Ok(row)
    }

    /// `A_n(x, T)` for `1 ≤ n ≤ N + 1`.
    pub fn basis_response(&self, n: usize, x: f64) -> Result<f64> {
        if n == 0 || n > self.problem.basis_count() {
            return Err(Error::InvalidParams(format!("basis index {n} outside 1..={}", self.problem.basis_count())));
        }
        Ok(self.row(x)?[n - 1])
    }

    /// `B(x, T)`.
    pub fn rhs(&self, x: f64) -> Result<f64> {
        Ok(*self.row(x)?.last().unwrap())
    }

    /// Builds the system from precomputed rows (one per collocation point).
    pub fn system_from_rows(&self, rows: Vec<Result<Vec<f64>>>) -> Result<ControlSystem> {
        let nb = self.problem.basis_count();
        let mut a = Matrix::zeros(nb, nb);
        let mut b = Vec::with_capacity(nb);
        let mut failed = String::new();
        for (k, r) in rows.into_iter().enumerate() {
            match r {
                Ok(row) => {
                    for j in 0..nb {
                        a[(k, j)] = row[j];
                    }
                    b.push(row[nb]);
                }
                Err(e) => failed.push_str(&format!(" row {k}: {e:?};")),
            }
        }
        if !failed.is_empty() {
            return Err(Error::InvalidSpec(format!("assembly failed:{failed}")));
        }
        let condition = Svd::new(&a).condition();
        Ok(ControlSystem { a, b, condition, extended: None })
    }

    /// Sequential assembly over all collocation points.
    pub fn assemble(&self) -> Result<ControlSystem> {
        let rows = self.problem.collocation_xs().into_iter().map(|x| self.row(x)).collect();
        self.system_from_rows(rows)
    }
}

/// `B(x, T)`: the uncontrolled state at the final time.
#[allow(non_snake_case)]
pub fn rhs_B(problem: &ControlProblem, x: f64, profile: &AccuracyProfile) -> Result<f64> {
    Assembler::new(problem, profile)?.rhs(x)
}

/// `A_n(x, T)`: minus the final-time response to `g = φ_n`.
#[allow(non_snake_case)]
pub fn basis_response_A(problem: &ControlProblem, n: usize, x: f64, profile: &AccuracyProfile) -> Result<f64> {
    Assembler::new(problem, profile)?.basis_response(n, x)
}

pub fn assemble_system(problem: &ControlProblem, profile: &AccuracyProfile) -> Result<ControlSystem> {
    Assembler::new(problem, profile)?.assemble()
}

/// [`assemble_system`] in the requested arithmetic. `profile` is ignored for
/// [`Precision::Extended`], which has its own settings.
pub fn assemble_with(problem: &ControlProblem, profile: &AccuracyProfile, precision: Precision) -> Result<ControlSystem> {
    match precision {
        Precision::Double => assemble_system(problem, profile),
        Precision::Extended => ExtendedAssembler::new(problem, &AccuracyProfile::extended())?.assemble(),
    }
}

/// `A⁻¹ b` by LU with partial pivoting.
pub fn solve_exact(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    check_square(a, b)?;
    lu_solve(a, b)
}

/// LU when `κ(A) ≤ 10¹²`, otherwise the minimum-norm least-squares solution.
pub fn solve_stable(a: &Matrix, b: &[f64]) -> Result<(Vec<f64>, f64)> {
    check_square(a, b)?;
    let svd = Svd::new(a);
    let cond = svd.condition();
    if cond > SVD_SWITCH {
        Ok((svd.solve_min_norm(b, f64::EPSILON), cond))
    } else {
        Ok((lu_solve(a, b)?, cond))
    }
}

/// Minimum-norm `c` with `‖Ac − b‖₂ ≤ δ`: zero when `‖b‖₂ ≤ δ`, otherwise
/// the Tikhonov solution `c(μ) = (AᵀA + μI)⁻¹Aᵀb` whose discrepancy equals
/// `δ`.
pub fn solve_regularized(a: &Matrix, b: &[f64], delta: f64) -> Result<Vec<f64>> {
    check_square(a, b)?;
    if !(delta > 0.0) {
        return Err(Error::InvalidParams(format!("delta must be positive, got {delta}")));
    }
    if linalg::norm2(b) <= delta {
        return Ok(alloc::vec![0.0; a.cols()]);
    }
    let svd = Svd::new(a);
    let beta = svd.project(b);
    let outside = ({
        let nb = linalg::norm2(b);
        nb * nb
    } - beta.iter().map(|v| v * v).sum::<f64>())
    .max(0.0);
    let discrepancy = |mu: f64| -> f64 {
        let inside: f64 = svd
            .sigma
            .iter()
            .zip(&beta)
            .map(|(s, bb)| {
                let r = mu * bb / (s * s + mu);
                r * r
            })
            .sum();
        math::sqrt(inside + outside)
    };
    let filtered = |mu: f64| -> Vec<f64> {
        let w: Vec<f64> = svd.sigma.iter().zip(&beta).map(|(s, bb)| s * bb / (s * s + mu)).collect();
        svd.combine(&w)
    };
    let smax = svd.sigma.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return Ok(alloc::vec![0.0; a.cols()]);
    }
    let (mut lo, mut hi) = (math::ln(smax * smax) - 80.0, math::ln(smax * smax) + 80.0);
    if discrepancy(math::exp(lo)) > delta {
        // δ is below the attainable residual: least-squares limit.
        return Ok(svd.solve_min_norm(b, f64::EPSILON));
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        let d = discrepancy(math::exp(mid));
        if math::abs(d - delta) <= DISCREPANCY_TOL * delta {
            return Ok(filtered(math::exp(mid)));
        }
        if d > delta {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(filtered(math::exp(lo)))
}

fn check_square(a: &Matrix, b: &[f64]) -> Result<()> {
    if a.rows() != a.cols() || a.rows() != b.len() {
        return Err(Error::InvalidParams(format!("system is {}x{} with {} right-hand entries", a.rows(), a.cols(), b.len())));
    }
    if a.max_abs().is_nan() || !b.iter().all(|v| v.is_finite()) || !a.max_abs().is_finite() {
        return Err(Error::InvalidParams("system has non-finite entries".into()));
    }
    Ok(())
}

/// `v(t) = Σ c_n φ_n(t)`.
pub fn reconstruct_control(coeffs: &[f64], t: f64, tau: f64, t_final: f64) -> f64 {
    coeffs.iter().enumerate().map(|(k, cn)| cn * phi_n(t, k + 1, tau, t_final)).sum()
}

/// `‖v‖₂` over `[τ, T]` by Parseval: `sqrt((T − τ)/2 · Σ c_n²)`.
pub fn norm_l2_time(coeffs: &[f64], tau: f64, t_final: f64) -> f64 {
    math::sqrt(0.5 * (t_final - tau) * coeffs.iter().map(|c| c * c).sum::<f64>())
}

/// `‖θ‖₂` over `[0, L]` from uniform samples, composite Simpson.
pub fn norm_l2_space(profile: &[f64], length: f64) -> f64 {
    if profile.len() < 2 {
        return 0.0;
    }
    let h = length / (profile.len() - 1) as f64;
    let sq: Vec<f64> = profile.iter().map(|v| v * v).collect();
    math::sqrt(quad::simpson(&sq, h).max(0.0))
}

/// Re-simulates the controlled system and returns `‖θ(·, T)‖₂` with the
/// final profile on [`VERIFY_POINTS`] uniform points.
pub fn verify_control(problem: &ControlProblem, coeffs: &[f64], profile: &AccuracyProfile) -> Result<(f64, SolutionGrid)> {
    let spec = problem.controlled_spec(coeffs)?;
    let solver = Solver::new(spec, *profile)?;
    let l = problem.params.length;
    let xs: Vec<f64> = (0..VERIFY_POINTS).map(|i| l * i as f64 / (VERIFY_POINTS - 1) as f64).collect();
    let grid = solve_grid(&solver, &xs, &[problem.t_final]);
    if !grid.all_converged() {
        let bad = grid.converged.iter().filter(|r| !r[0]).count();
        return Err(Error::NotConverged { change: bad as f64, tolerance: 0.0 });
    }
    Ok((norm_l2_space(&grid.column(0), l), grid))
}

/// Collects the norms of a solve into a [`ControlSolution`].
pub fn summarize(
    problem: &ControlProblem,
    system: &ControlSystem,
    coeffs: Vec<f64>,
    delta: Option<f64>,
    verified_error: f64,
) -> ControlSolution {
    ControlSolution {
        control_norm: norm_l2_time(&coeffs, problem.tau, problem.t_final),
        residual_norm: linalg::residual_norm(&system.a, &coeffs, &system.b),
        verified_error,
        regularized: delta.is_some(),
        delta,
        condition_estimate: system.condition,
        coeffs,
    }
}

/// Assembles, solves (exactly, or regularized when `delta` is given) and
/// verifies.
pub fn synthesize(problem: &ControlProblem, delta: Option<f64>, profile: &AccuracyProfile) -> Result<ControlSolution> {
    synthesize_with(problem, delta, profile, Precision::Double)
}

pub fn synthesize_with(
    problem: &ControlProblem,
    delta: Option<f64>,
    profile: &AccuracyProfile,
    precision: Precision,
) -> Result<ControlSolution> {
    let system = assemble_with(problem, profile, precision)?;
    solve_and_verify(problem, &system, delta, profile)
}

pub fn solve_and_verify(
    problem: &ControlProblem,
    system: &ControlSystem,
    delta: Option<f64>,
    profile: &AccuracyProfile,
) -> Result<ControlSolution> {
    let coeffs = match (delta, &system.extended) {
        (Some(d), _) => solve_regularized(&system.a, &system.b, d)?,
        (None, Some(rows)) => rows.solve()?,
        (None, None) => solve_stable(&system.a, &system.b)?.0,
    };
    let (err, _) = verify_control(problem, &coeffs, profile)?;
    Ok(summarize(problem, system, coeffs, delta, err))
}

/// Bisects `log δ` over `[10⁻⁶, 10⁻¹]` so the verified final error matches
/// `target`. Returns `δ` and its solution; the end point closest to the
/// target when the target lies outside the bracket.
pub fn delta_for_target_error(
    problem: &ControlProblem,
    system: &ControlSystem,
    target: f64,
    profile: &AccuracyProfile,
) -> Result<(f64, ControlSolution)> {
    let eval = |d: f64| solve_and_verify(problem, system, Some(d), profile);
    let (mut lo, mut hi) = (math::ln(1e-6), math::ln(1e-1));
    let s_lo = eval(math::exp(lo))?;
    if s_lo.verified_error >= target {
        return Ok((math::exp(lo), s_lo));
    }
    let s_hi = eval(math::exp(hi))?;
    if s_hi.verified_error <= target {
        return Ok((math::exp(hi), s_hi));
    }
    let mut best = s_lo;
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        let s = eval(math::exp(mid))?;
        if (s.verified_error - target).abs() < (best.verified_error - target).abs() {
            best = s.clone();
        }
        if math::abs(math::ln(s.verified_error / target)) < 1e-3 {
            break;
        }
        if s.verified_error > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((best.delta.unwrap_or(math::exp(lo)), best))
}
