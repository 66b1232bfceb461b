//! Evaluation of `θ(x, t)` from the integral representation.
//!
//! Every contour integrand is assembled from the scaled kernels of
//! [`crate::spectral`], the right-scaled initial transform and the damped,
//! regularized boundary transforms, so no factor grows along the contour.
//! With `E = e^{2iμL}` the Robin–Robin determinant is
//! `Δ = e^{−κL} e^{−iμL} [(1−iαλ)(1−iβν) − E(1−iαν)(1−iβλ)]`, and the
//! bracket is what the integrands divide by.

use alloc::format;
use alloc::vec::Vec;

use crate::contour::{self, AccuracyProfile, Contour, Part};
use crate::math::{self, C64, I, PI};
use crate::params::{ProblemParams, Robin};
use crate::spectral::{self, cos_scaled, f_gamma_scaled, g_scaled, nu, omega, sin_scaled, wave, RootReport};
use crate::transforms::{resonance_radius, BoundarySignal, InitialData};
use crate::{Error, Result};

/// Imaginary residue allowed in a real solution value, relative to `1 + |θ|`.
pub const IMAG_TOL: f64 = 1e-8;

/// Boundary-condition family of an IBVP.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcKind {
    RobinRobin,
    RobinDirichlet,
    DirichletDirichlet,
    NeumannNeumann,
}

/// Complete initial-boundary value problem. For `NeumannNeumann` the
/// signals are the fluxes `θ_x(0, t)` and `θ_x(L, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IbvpSpec {
    pub params: ProblemParams,
    pub initial: InitialData,
    pub left: BoundarySignal,
    pub right: BoundarySignal,
    pub bc_kind: BcKind,
}

impl IbvpSpec {
    pub fn new(params: ProblemParams, initial: InitialData, left: BoundarySignal, right: BoundarySignal, bc_kind: BcKind) -> Result<Self> {
        let spec = IbvpSpec { params, initial, left, right, bc_kind };
        spec.validate()?;
        Ok(spec)
    }

    /// Picks the boundary-condition family implied by `α` and `β`.
    pub fn infer_kind(params: &ProblemParams) -> Result<BcKind> {
        match (params.alpha, params.beta) {
            (Robin::Neumann, Robin::Neumann) => Ok(BcKind::NeumannNeumann),
            (Robin::Neumann, _) | (_, Robin::Neumann) => Err(Error::NeumannNotAllowed),
            (Robin::Coefficient(a), Robin::Coefficient(b)) => Ok(if a == 0.0 && b == 0.0 {
                BcKind::DirichletDirichlet
            } else if b == 0.0 {
                BcKind::RobinDirichlet
            } else {
                BcKind::RobinRobin
            }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.initial.validate(self.params.length)?;
        self.left.validate()?;
        self.right.validate()?;
        let (a, b) = (self.params.alpha, self.params.beta);
        let ok = match self.bc_kind {
            BcKind::RobinRobin => !a.is_neumann() && !b.is_neumann(),
            BcKind::RobinDirichlet => !a.is_neumann() && b == Robin::Coefficient(0.0),
            BcKind::DirichletDirichlet => a == Robin::Coefficient(0.0) && b == Robin::Coefficient(0.0),
            BcKind::NeumannNeumann => a.is_neumann() && b.is_neumann(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSpec(format!("{:?} is inconsistent with alpha={:?}, beta={:?}", self.bc_kind, a, b)))
        }
    }
}

/// Complex value of the representation before taking the real part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: C64,
}

impl Evaluation {
    pub fn real(&self) -> f64 {
        self.value.re
    }

    pub fn is_real(&self) -> bool {
        math::abs(self.value.im) < IMAG_TOL * (1.0 + math::abs(self.value.re))
    }

    /// Real part, or `NotConverged` when the imaginary residue is too large.
    pub fn checked(&self) -> Result<f64> {
        if self.is_real() {
            Ok(self.value.re)
        } else {
            Err(Error::NotConverged { change: math::abs(self.value.im), tolerance: IMAG_TOL * (1.0 + math::abs(self.value.re)) })
        }
    }
}

/// Solver for one IBVP: caches the root analysis and evaluates pointwise.
#[derive(Debug, Clone)]
pub struct Solver {
    spec: IbvpSpec,
    roots: RootReport,
    profile: AccuracyProfile,
}

impl Solver {
    pub fn new(spec: IbvpSpec, profile: AccuracyProfile) -> Result<Self> {
        spec.validate()?;
        let roots = match spec.bc_kind {
            BcKind::NeumannNeumann => RootReport::line_only(),
            _ => spectral::find_roots(&spec.params)?,
        };
        Ok(Solver { spec, roots, profile })
    }

    pub fn spec(&self) -> &IbvpSpec {
        &self.spec
    }

    pub fn roots(&self) -> &RootReport {
        &self.roots
    }

    pub fn profile(&self) -> &AccuracyProfile {
        &self.profile
    }

    /// Contour valid for every evaluation time in `[t_min, t_max]`. Active
    /// sine-series signals shorten the damping time to `t − τ` (or `t − T`
    /// past the final time) and add vertical tails.
    pub fn contour(&self, t_min: f64, t_max: f64) -> Result<Contour> {
        let signals = [&self.spec.left, &self.spec.right];
        let mut damping = t_min;
        let mut tails = false;
        let mut freq: f64 = 0.0;
        for sig in signals {
            damping = damping.min(sig.damping_time(t_min)).min(sig.damping_time(t_max));
            if let BoundarySignal::SineSeries { tau, t_final, .. } = sig {
                if !sig.is_zero() && t_min <= *t_final && t_max > *tau {
                    tails = true;
                    freq = freq.max(sig.max_frequency());
                }
            }
        }
        let p = &self.spec.params;
        if tails {
            let min_s = 1.5 * resonance_radius(freq, p) + 1.0;
            contour::make_tailed_contour(p, &self.roots, damping, t_max, min_s, &self.profile)
        } else {
            contour::make_contour_window(p, &self.roots, damping, t_max, &self.profile)
        }
    }

    /// `θ(x, t)` on a fresh contour.
    pub fn evaluate(&self, x: f64, t: f64) -> Result<Evaluation> {
        if t == 0.0 {
            return self.evaluate_on(None, x, t);
        }
        let ct = self.contour(t, t)?;
        self.evaluate_on(Some(&ct), x, t)
    }

    /// `θ(x, t)` on a caller-supplied contour; `None` only for `t = 0`.
    pub fn evaluate_on(&self, contour: Option<&Contour>, x: f64, t: f64) -> Result<Evaluation> {
        Ok(self.evaluate_many(contour, &[x], t)?.remove(0))
    }

    /// `θ(xs[i], t)` for every `i` on one contour. The `x`-independent
    /// transforms are computed once per node and all points share the
    /// refinement level, so a batch is at least as accurate as its worst
    /// single point.
    pub fn evaluate_many(&self, contour: Option<&Contour>, xs: &[f64], t: f64) -> Result<Vec<Evaluation>> {
        let l = self.spec.params.length;
        if let Some(&x) = xs.iter().find(|&&x| !(x >= 0.0 && x <= l)) {
            return Err(Error::InvalidParams(format!("point (x={x}, t={t}) outside [0, {l}] x [0, inf)")));
        }
        if !(t >= 0.0) {
            return Err(Error::InvalidParams(format!("time {t} is negative")));
        }
        if t == 0.0 {
            return Ok(xs.iter().map(|&x| Evaluation { value: C64::new(self.spec.initial.value(x, l), 0.0) }).collect());
        }
        let ct = contour.ok_or(Error::ZeroTimeUnbounded)?;
        if !ct.has_tails() && (self.spec.left.needs_tails(t) || self.spec.right.needs_tails(t)) {
            return Err(Error::InvalidParams("sine-series boundary data need a contour with tails".into()));
        }
        let boundary = self.contour_terms(ct, xs, t)?;
        xs.iter()
            .zip(boundary)
            .map(|(&x, b)| Ok(Evaluation { value: real_line_term(&self.spec.params, &self.spec.initial, x, t, &self.profile)? + b }))
            .collect()
    }

    fn contour_terms(&self, ct: &Contour, xs: &[f64], t: f64) -> Result<Vec<C64>> {
        let k = Kernel::new(&self.spec, t)?;
        if k.trivial() {
            return Ok(alloc::vec![C64::new(0.0, 0.0); xs.len()]);
        }
        let v = contour::integrate_parts(ct, xs.len(), |z, part, out| {
            let node = k.node(z, part);
            for (o, &x) in out.iter_mut().zip(xs) {
                *o = k.at(&node, x);
            }
        })?;
        Ok(v.into_iter().map(|z| z * k.prefactor()).collect())
    }
}

/// `(1/2π) ∫_ℝ e^{iλx − ω(λ)t} θ̂₀(λ) dλ`; `θ₀(x)` at `t = 0`.
pub fn real_line_term(params: &ProblemParams, initial: &InitialData, x: f64, t: f64, profile: &AccuracyProfile) -> Result<C64> {
    if t == 0.0 {
        return Ok(C64::new(initial.value(x, params.length), 0.0));
    }
    if initial.is_zero() {
        return Ok(C64::new(0.0, 0.0));
    }
    let l = params.length;
    let v = contour::integrate_real_line(|z| (I * z * x - omega(z, params) * t).exp() * initial.hat(z, l), params, t, profile)?;
    Ok(v / (2.0 * PI))
}

/// Integrand factors that do not depend on `x`, at one node.
struct Node {
    lam: C64,
    m: C64,
    den: C64,
    right: C64,
    left: C64,
}

/// Data shared by the contour integrands at one time.
struct Kernel<'a> {
    p: &'a ProblemParams,
    kind: BcKind,
    initial: &'a InitialData,
    left: &'a BoundarySignal,
    right: &'a BoundarySignal,
    /// Finite Robin coefficients; unused entries are zero.
    a: f64,
    b: f64,
    t: f64,
    has_initial: bool,
    has_left: bool,
    has_right: bool,
}

impl<'a> Kernel<'a> {
    fn new(s: &'a IbvpSpec, t: f64) -> Result<Self> {
        let (a, b) = match s.bc_kind {
            BcKind::RobinRobin => (s.params.alpha.finite()?, s.params.beta.finite()?),
            BcKind::RobinDirichlet | BcKind::DirichletDirichlet => (s.params.alpha.finite()?, 0.0),
            BcKind::NeumannNeumann => (0.0, 0.0),
        };
        Ok(Kernel {
            p: &s.params,
            kind: s.bc_kind,
            initial: &s.initial,
            left: &s.left,
            right: &s.right,
            a,
            b,
            t,
            has_initial: !s.initial.is_zero(),
            has_left: !s.left.is_zero(),
            has_right: !s.right.is_zero(),
        })
    }

    fn trivial(&self) -> bool {
        !(self.has_initial || self.has_left || self.has_right)
    }

    fn prefactor(&self) -> C64 {
        match self.kind {
            BcKind::NeumannNeumann => C64::new(1.0 / PI, 0.0),
            _ => -I / PI,
        }
    }

    /// Regularized signal transform; only its algebraic part on the tails.
    fn signal(&self, sig: &BoundarySignal, w: C64, part: Part) -> C64 {
        match part {
            Part::Ray => sig.damped_regularized(w, self.t),
            Part::Tail => sig.algebraic(w, self.t),
        }
    }

    fn node(&self, lam: C64, part: Part) -> Node {
        let p = self.p;
        let (a, b, l) = (self.a, self.b, p.length);
        let one = C64::new(1.0, 0.0);
        let m = lam + I * p.kappa();
        let n = nu(lam, p);
        let w = omega(lam, p);
        let flux = C64::new(p.k0, 0.0) - I * lam * (2.0 * p.d0);
        let decay = (-w * self.t).exp();
        let initial = self.has_initial && part == Part::Ray;
        let sig_r = if self.has_right { self.signal(self.right, w, part) } else { C64::new(0.0, 0.0) };
        let sig_l = if self.has_left { self.signal(self.left, w, part) } else { C64::new(0.0, 0.0) };
        let (den, mut right, mut left) = match self.kind {
            BcKind::RobinRobin => {
                let den = (one - I * a * lam) * (one - I * b * n) - wave(m, l) * (one - I * a * n) * (one - I * b * lam);
                (den, -flux * sig_r, -flux * sig_l)
            }
            BcKind::RobinDirichlet | BcKind::DirichletDirichlet => {
                (one - I * a * lam - wave(m, l) * (one - I * a * n), -flux * sig_r, -flux * sig_l)
            }
            BcKind::NeumannNeumann => {
                let lam_nu = lam * n;
                (one - wave(m, l), I * flux * sig_r / lam_nu, -I * flux * sig_l / lam_nu)
            }
        };
        if initial {
            let (hr, hl) = (self.initial.hat_right(lam, l), self.initial.hat(n, l));
            match self.kind {
                BcKind::RobinRobin => {
                    right += decay * (one - I * b * lam) * hr;
                    left += decay * (one - I * a * n) * hl;
                }
                BcKind::RobinDirichlet | BcKind::DirichletDirichlet => {
                    right += decay * hr;
                    left += decay * (one - I * a * n) * hl;
                }
                BcKind::NeumannNeumann => {
                    right += decay * hr / n;
                    left -= decay * hl / lam;
                }
            }
        }
        Node { lam, m, den, right, left }
    }

    /// Integrand at `x` without the prefactor. Robin ends use `F_γ`, a
    /// Dirichlet right end `e^{i(L−x)μ} sin((L−x)μ)` and Neumann ends `G`.
    fn at(&self, nd: &Node, x: f64) -> C64 {
        let (l, kappa) = (self.p.length, self.p.kappa());
        let m = nd.m;
        // e^{−κ(L−x)} e^{iμ(L−x)} and e^{κx} e^{iμx}
        let right_phase = (I * (nd.lam + I * (2.0 * kappa)) * (l - x)).exp();
        let left_phase = (I * nd.lam * x).exp();
        let v = match self.kind {
            BcKind::RobinRobin => {
                let fa = f_gamma_scaled(m, wave(m, x), x, self.a, kappa);
                let fb = f_gamma_scaled(m, wave(m, x - l), x - l, self.b, kappa);
                right_phase * fa * nd.right - left_phase * fb * nd.left
            }
            BcKind::RobinDirichlet | BcKind::DirichletDirichlet => {
                let fa = f_gamma_scaled(m, wave(m, x), x, self.a, kappa);
                let sn = sin_scaled(wave(m, l - x), l - x);
                right_phase * fa * nd.right - left_phase * sn * nd.left
            }
            BcKind::NeumannNeumann => {
                let gx = g_scaled(m, wave(m, x), x, kappa);
                let gl = g_scaled(m, wave(m, x - l), x - l, kappa);
                right_phase * gx * nd.right + left_phase * gl * nd.left
            }
        };
        v / nd.den
    }
}

fn expect_kind(spec: &IbvpSpec, kind: BcKind) -> Result<()> {
    if spec.bc_kind != kind {
        return Err(Error::InvalidSpec(format!("expected {:?}, got {:?}", kind, spec.bc_kind)));
    }
    Ok(())
}

fn solve_kind(spec: &IbvpSpec, kind: BcKind, x: f64, t: f64) -> Result<f64> {
    expect_kind(spec, kind)?;
    Solver::new(spec.clone(), AccuracyProfile::default())?.evaluate(x, t)?.checked()
}

/// Robin–Robin solution value.
pub fn solve_rr(spec: &IbvpSpec, x: f64, t: f64) -> Result<f64> {
    solve_kind(spec, BcKind::RobinRobin, x, t)
}

/// Robin–Dirichlet solution value.
pub fn solve_rd(spec: &IbvpSpec, x: f64, t: f64) -> Result<f64> {
    solve_kind(spec, BcKind::RobinDirichlet, x, t)
}

/// Dirichlet–Dirichlet solution value.
pub fn solve_dd(spec: &IbvpSpec, x: f64, t: f64) -> Result<f64> {
    solve_kind(spec, BcKind::DirichletDirichlet, x, t)
}

/// Neumann–Neumann solution value; signals are the end fluxes `θ_x`.
pub fn solve_nn(spec: &IbvpSpec, x: f64, t: f64) -> Result<f64> {
    solve_kind(spec, BcKind::NeumannNeumann, x, t)
}

/// Constant-flux infiltration with a fixed water table: initial content
/// `theta0`, flux `q` at `x = 0` (Robin coefficient one) and saturation
/// `thetas` at `x = L`. Times in seconds.
#[derive(Debug, Clone)]
pub struct Braester {
    pub q: f64,
    pub theta0: f64,
    pub thetas: f64,
    solver: Solver,
}

impl Braester {
    pub fn new(q: f64, theta0: f64, thetas: f64, d0: f64, k0: f64, length: f64, profile: AccuracyProfile) -> Result<Self> {
        let params = ProblemParams::new(d0, k0, length, 1.0, 0.0)?;
        let spec = IbvpSpec::new(
            params,
            InitialData::zero(),
            BoundarySignal::Constant(q / d0),
            BoundarySignal::Constant(thetas - theta0),
            BcKind::RobinDirichlet,
        )?;
        Ok(Braester { q, theta0, thetas, solver: Solver::new(spec, profile)? })
    }

    /// Rehovot sand column of length 60 cm under flux `q` cm/s.
    pub fn rehovot(q: f64, profile: AccuracyProfile) -> Result<Self> {
        let p = rehovot_params()?;
        Braester::new(q, 65e-3, 397e-3, p.d0, p.k0, p.length, profile)
    }

    pub fn solver(&self) -> &Solver {
        &self.solver
    }

    pub fn value(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.theta0 + self.solver.evaluate(x, t)?.checked()?)
    }

    pub fn value_on(&self, contour: Option<&Contour>, x: f64, t: f64) -> Result<f64> {
        Ok(self.theta0 + self.solver.evaluate_on(contour, x, t)?.checked()?)
    }
}

/// Rehovot sand: `D₀ = 0.0208` cm²/s, `K₀ = 0.144 D₀` cm/s, `L = 60` cm,
/// unit Robin coefficient at the surface and a Dirichlet base.
pub fn rehovot_params() -> Result<ProblemParams> {
    let d0 = 0.208e-1;
    ProblemParams::new(d0, 0.144 * d0, 60.0, 1.0, 0.0)
}

/// Water content of the constant-flux scenario at `(x, t)`.
pub fn braester_profile(q: f64, theta0: f64, thetas: f64, params: &ProblemParams, x: f64, t: f64) -> Result<f64> {
    Braester::new(q, theta0, thetas, params.d0, params.k0, params.length, AccuracyProfile::default())?.value(x, t)
}

/// Conductivity `K(x, t)` of the rainfall scenario with `K₀ = 1`,
/// `D₀ = 1/2`, `α = β = 1/2`, zero initial conductivity, rate `R` at the
/// surface and no flux excess at depth `L`.
///
/// Evaluated with the factored determinant
/// `(1 − iλ/2)(1 − iν/2)(e^{−iλL} − e^{−iνL})`.
pub fn philip_conductivity(r: f64, length: f64, x: f64, t: f64) -> Result<f64> {
    philip_conductivity_with(r, length, x, t, &AccuracyProfile::default())
}

pub fn philip_params(length: f64) -> Result<ProblemParams> {
    ProblemParams::new(0.5, 1.0, length, 0.5, 0.5)
}

pub fn philip_conductivity_with(r: f64, length: f64, x: f64, t: f64, profile: &AccuracyProfile) -> Result<f64> {
    let p = philip_params(length)?;
    if !(x >= 0.0 && x <= length) || !(t >= 0.0) {
        return Err(Error::InvalidParams(format!("point (x={x}, t={t}) outside the domain")));
    }
    if t == 0.0 || r == 0.0 {
        return Ok(0.0);
    }
    let roots = spectral::find_roots(&p)?;
    let ct = contour::make_contour(&p, &roots, t, profile)?;
    let one = C64::new(1.0, 0.0);
    let l = length;
    let v = contour::integrate(&ct, |lam| {
        let m = lam + I;
        let n = nu(lam, &p);
        let w = omega(lam, &p);
        let e = wave(m, l);
        let den = (one - I * lam * 0.5) * (one - I * n * 0.5) * (one - e);
        let y = x - l;
        let f = sin_scaled(wave(m, y), y) * (0.5 - 1.0) - m * 0.5 * cos_scaled(wave(m, y));
        // R (1 − e^{−ωt})/ω with the R/ω part dropped
        let src = -(-w * t).exp() / w;
        (I * lam * x).exp() * (one - I * lam) * f * src / den
    })?;
    Ok((-I / PI * v).re * r)
}

/// Field values on a tensor grid; rows follow `xs`, columns follow `ts`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionGrid {
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub imag: Vec<Vec<f64>>,
    pub converged: Vec<Vec<bool>>,
}

impl SolutionGrid {
    pub fn new(xs: Vec<f64>, ts: Vec<f64>) -> Self {
        let (nx, nt) = (xs.len(), ts.len());
        SolutionGrid {
            xs,
            ts,
            values: alloc::vec![alloc::vec![f64::NAN; nt]; nx],
            imag: alloc::vec![alloc::vec![f64::NAN; nt]; nx],
            converged: alloc::vec![alloc::vec![false; nt]; nx],
        }
    }

    pub fn set(&mut self, i: usize, j: usize, r: Result<Evaluation>) {
        match r {
            Ok(e) => {
                self.values[i][j] = e.value.re;
                self.imag[i][j] = e.value.im;
                self.converged[i][j] = e.is_real() && e.value.re.is_finite();
            }
            Err(_) => {
                self.converged[i][j] = false;
            }
        }
    }

    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|r| r.iter().all(|&c| c))
    }

    /// One `x` column at time index `j`.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|r| r[j]).collect()
    }
}

/// Evaluates the solver on every `(x, t)` pair, one contour per time.
/// Failures are flagged per entry.
pub fn solve_grid(solver: &Solver, xs: &[f64], ts: &[f64]) -> SolutionGrid {
    let mut grid = SolutionGrid::new(xs.to_vec(), ts.to_vec());
    for (j, &t) in ts.iter().enumerate() {
        let ct = if t > 0.0 { solver.contour(t, t).map(Some) } else { Ok(None) };
        for (i, r) in evaluate_column(solver, ct.as_ref().map(Option::as_ref), xs, t).into_iter().enumerate() {
            grid.set(i, j, r);
        }
    }
    grid
}

/// One batch per time; if the batch fails, each point is retried alone so
/// failures stay per entry.
pub fn evaluate_column(
    solver: &Solver,
    contour: core::result::Result<Option<&Contour>, &Error>,
    xs: &[f64],
    t: f64,
) -> Vec<Result<Evaluation>> {
    let ct = match contour {
        Ok(c) => c,
        Err(e) => return xs.iter().map(|_| Err(e.clone())).collect(),
    };
    match solver.evaluate_many(ct, xs, t) {
        Ok(v) => v.into_iter().map(Ok).collect(),
        Err(_) if xs.len() > 1 => xs.iter().map(|&x| solver.evaluate_on(ct, x, t)).collect(),
        Err(e) => alloc::vec![Err(e)],
    }
}
