//! Forward transforms of the data.
//!
//! `θ̂₀(λ) = ∫₀ᴸ e^{−iλx} θ₀(x) dx` for initial profiles and the t-transform
//! `∫₀ᵗ e^{ws} s(s) ds` for boundary signals. Alongside the plain transforms
//! this module exposes bounded variants used by the solvers:
//!
//! * [`InitialData::hat_right`] is `e^{iλL} θ̂₀(λ)`, bounded for `Im λ ≥ 0`;
//! * [`BoundarySignal::damped`] is `e^{−wt}` times the t-transform;
//! * [`BoundarySignal::damped_regularized`] additionally subtracts `s(t)/w`.

use alloc::format;
use alloc::vec::Vec;

use crate::math::{self, c, phi1, phi2, C64, I, PI};
use crate::params::ProblemParams;
use crate::quad;
use crate::spectral::omega;
use crate::{Error, Result};

/// Relative resonance threshold for the sine-basis transform.
pub const RESONANCE_TOL: f64 = 1e-6;
/// Closed forms switch to quadrature within `REMOVABLE_RADIUS / L` of a
/// removable singularity.
pub const REMOVABLE_RADIUS: f64 = 1e-3;
/// Composite Gauss–Legendre layout of the quadrature fallback.
pub const FALLBACK_PANELS: usize = 64;
pub const FALLBACK_ORDER: usize = 8;

/// Initial profile `θ₀` on `[0, L]`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// `height` on `(0, split)`, zero on `(split, L)`.
    PiecewiseStep {
        height: f64,
        split: f64,
    },
    /// `cos(πx/(2L))`.
    HalfCosine,
    /// `sin(πx/L)`.
    FullSine,
    /// `e^{rate·x} sin(mode·πx/L)`.
    ExpSine {
        rate: f64,
        mode: u32,
    },
    Constant(f64),
    /// Samples `(x, θ₀(x))`, linearly interpolated.
    Tabulated(Vec<(f64, f64)>),
    /// Linear combination `Σ wᵢ θᵢ`.
    Sum(Vec<(f64, InitialData)>),
}

impl InitialData {
    pub fn zero() -> Self {
        InitialData::Constant(0.0)
    }

    /// `Σ wᵢ θᵢ` as a single profile.
    pub fn combine(parts: impl IntoIterator<Item = (f64, InitialData)>) -> Self {
        InitialData::Sum(parts.into_iter().collect())
    }

    pub fn validate(&self, length: f64) -> Result<()> {
        match self {
            InitialData::PiecewiseStep { height, split } => {
                if !height.is_finite() || !(*split > 0.0 && *split < length) {
                    return Err(Error::InvalidSpec(format!("step split {split} must lie in (0, {length})")));
                }
            }
            InitialData::ExpSine { rate, mode } => {
                if !rate.is_finite() || *mode == 0 {
                    return Err(Error::InvalidSpec("ExpSine needs a finite rate and mode >= 1".into()));
                }
            }
            InitialData::Constant(v) => {
                if !v.is_finite() {
                    return Err(Error::InvalidSpec("constant initial value must be finite".into()));
                }
            }
            InitialData::Tabulated(s) => {
                if s.len() < 2 {
                    return Err(Error::InvalidSpec("tabulated data needs at least two samples".into()));
                }
                if s.windows(2).any(|w| !(w[1].0 > w[0].0)) || s.iter().any(|p| !p.1.is_finite()) {
                    return Err(Error::InvalidSpec("tabulated x must be strictly increasing with finite values".into()));
                }
                let tol = 1e-12 * length;
                if math::abs(s[0].0) > tol || math::abs(s[s.len() - 1].0 - length) > tol {
                    return Err(Error::InvalidSpec(format!("tabulated samples must cover [0, {length}]")));
                }
            }
            InitialData::Sum(parts) => {
                for (w, d) in parts {
                    if !w.is_finite() {
                        return Err(Error::InvalidSpec("sum weights must be finite".into()));
                    }
                    d.validate(length)?;
                }
            }
            InitialData::HalfCosine | InitialData::FullSine => {}
        }
        Ok(())
    }

    /// True when `θ₀ ≡ 0`.
    pub fn is_zero(&self) -> bool {
        match self {
            InitialData::PiecewiseStep { height, .. } => *height == 0.0,
            InitialData::Constant(v) => *v == 0.0,
            InitialData::Tabulated(s) => s.iter().all(|p| p.1 == 0.0),
            InitialData::Sum(parts) => parts.iter().all(|(w, d)| *w == 0.0 || d.is_zero()),
            _ => false,
        }
    }

    /// `θ₀(x)`. At a jump the mean of the one-sided limits is returned.
    pub fn value(&self, x: f64, length: f64) -> f64 {
        match self {
            InitialData::PiecewiseStep { height, split } => {
                if x < *split {
                    *height
                } else if x == *split {
                    0.5 * height
                } else {
                    0.0
                }
            }
            InitialData::HalfCosine => math::cos(PI * x / (2.0 * length)),
            InitialData::FullSine => math::sin(PI * x / length),
            InitialData::ExpSine { rate, mode } => math::exp(rate * x) * math::sin(*mode as f64 * PI * x / length),
            InitialData::Constant(v) => *v,
            InitialData::Tabulated(s) => interpolate(s, x),
            InitialData::Sum(parts) => parts.iter().map(|(w, d)| w * d.value(x, length)).sum(),
        }
    }

    /// Interior points where `θ₀` is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            InitialData::PiecewiseStep { split, .. } => alloc::vec![*split],
            InitialData::Tabulated(s) => s.iter().map(|p| p.0).collect(),
            InitialData::Sum(parts) => {
                let mut b: Vec<f64> = parts.iter().flat_map(|(_, d)| d.breakpoints()).collect();
                b.sort_by(f64::total_cmp);
                b.dedup();
                b
            }
            _ => Vec::new(),
        }
    }

    /// `θ̂₀(λ) = ∫₀ᴸ e^{−iλx} θ₀(x) dx`.
    pub fn hat(&self, lambda: C64, length: f64) -> C64 {
        self.transform(lambda, length, false)
    }

    /// `e^{iλL} θ̂₀(λ) = ∫₀ᴸ e^{iλ(L−x)} θ₀(x) dx`.
    pub fn hat_right(&self, lambda: C64, length: f64) -> C64 {
        self.transform(lambda, length, true)
    }

    fn transform(&self, lambda: C64, l: f64, right: bool) -> C64 {
        match self {
            InitialData::PiecewiseStep { height, split } => {
                let s = *split;
                if right {
                    (I * lambda * (l - s)).exp() * phi1(I * lambda * s) * (height * s)
                } else {
                    phi1(-I * lambda * s) * (height * s)
                }
            }
            InitialData::Constant(v) => {
                let z = if right { I * lambda * l } else { -I * lambda * l };
                phi1(z) * (v * l)
            }
            InitialData::HalfCosine => {
                let p = PI / (2.0 * l);
                if (lambda - p).norm().min((lambda + p).norm()) < REMOVABLE_RADIUS / l {
                    return self.quadrature(lambda, l, right);
                }
                let den = lambda * lambda * (4.0 * l * l) - PI * PI;
                if right {
                    -(I * lambda * (2.0 * l) * (I * lambda * l).exp() + PI) * (2.0 * l) / den
                } else {
                    -(I * lambda * (2.0 * l) + (-I * lambda * l).exp() * PI) * (2.0 * l) / den
                }
            }
            InitialData::FullSine => InitialData::ExpSine { rate: 0.0, mode: 1 }.transform(lambda, l, right),
            InitialData::ExpSine { rate, mode } => {
                let k = *mode as f64 * PI / l;
                let centre = c(0.0, -rate);
                if (lambda - centre - k).norm().min((lambda - centre + k).norm()) < REMOVABLE_RADIUS / l {
                    return self.quadrature(lambda, l, right);
                }
                let a = -I * lambda + *rate;
                let den = a * a + k * k;
                let sign = if mode % 2 == 0 { 1.0 } else { -1.0 };
                if right {
                    ((I * lambda * l).exp() - math::exp(rate * l) * sign) * k / den
                } else {
                    (C64::new(1.0, 0.0) - (a * l).exp() * sign) * k / den
                }
            }
            InitialData::Tabulated(s) => tabulated_transform(s, lambda, l, right),
            InitialData::Sum(parts) => parts.iter().map(|(w, d)| d.transform(lambda, l, right) * *w).sum(),
        }
    }

    /// Composite Gauss–Legendre evaluation of the defining integral.
    pub fn quadrature(&self, lambda: C64, length: f64, right: bool) -> C64 {
        let nodes = quad::composite_gl(0.0, length, &self.breakpoints(), FALLBACK_PANELS, FALLBACK_ORDER);
        let mut sum = C64::new(0.0, 0.0);
        for (x, w) in nodes {
            let k = if right { (I * lambda * (length - x)).exp() } else { (-I * lambda * x).exp() };
            sum += k * (w * self.value(x, length));
        }
        sum
    }
}

fn interpolate(s: &[(f64, f64)], x: f64) -> f64 {
    if x <= s[0].0 {
        return s[0].1;
    }
    let last = s[s.len() - 1];
    if x >= last.0 {
        return last.1;
    }
    let j = s.partition_point(|p| p.0 <= x);
    let (x0, y0) = s[j - 1];
    let (x1, y1) = s[j];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Exact transform of the piecewise-linear interpolant, segment by segment.
fn tabulated_transform(s: &[(f64, f64)], lambda: C64, l: f64, right: bool) -> C64 {
    let mut sum = C64::new(0.0, 0.0);
    for w in s.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        let h = x1 - x0;
        if right {
            let z = I * lambda * h;
            sum += (I * lambda * (l - x1)).exp() * (phi1(z) * y0 + phi2(z) * (y1 - y0)) * h;
        } else {
            let z = -I * lambda * h;
            sum += (-I * lambda * x0).exp() * (phi1(z) * y1 - phi2(z) * (y1 - y0)) * h;
        }
    }
    sum
}

/// `θ̂₀(λ)` for the given profile.
pub fn theta0_hat(initial: &InitialData, lambda: C64, params: &ProblemParams) -> C64 {
    initial.hat(lambda, params.length)
}

/// `value · (e^{wt} − 1)/w`, continuous through `w = 0`.
pub fn ttransform_constant(value: f64, w: C64, t: f64) -> C64 {
    phi1(w * t) * (value * t)
}

/// Sine basis function supported on `[τ, T]`.
pub fn phi_n(t: f64, n: usize, tau: f64, t_final: f64) -> f64 {
    if t < tau || t > t_final {
        return 0.0;
    }
    math::sin(n as f64 * PI * (t - tau) / (t_final - tau))
}

/// `∫₀ᵗ e^{ωs} φ_n(s) ds` with `ω = ω(λ)`.
pub fn varphi_n(lambda: C64, t: f64, n: usize, tau: f64, t_final: f64, params: &ProblemParams) -> C64 {
    varphi_n_w(omega(lambda, params), t, n, tau, t_final)
}

/// [`varphi_n`] as a function of the rate `w`. For `t > T` the integral
/// stops at `T`.
pub fn varphi_n_w(w: C64, t: f64, n: usize, tau: f64, t_final: f64) -> C64 {
    if t <= tau {
        return C64::new(0.0, 0.0);
    }
    let te = t.min(t_final);
    let p = t_final - tau;
    let a = n as f64 * PI / p;
    let den = w * w + a * a;
    if den.norm() < RESONANCE_TOL * a * a {
        let (v, _) = quad::adaptive_gk(|s| (w * s).exp() * phi_n(s, n, tau, t_final), tau, te, 1e-14, 400);
        return v;
    }
    let arg = a * (te - tau);
    ((w * tau).exp() * a - (w * te).exp() * (a * math::cos(arg) - w * math::sin(arg))) / den
}

/// `e^{−wt} ∫₀ᵗ e^{ws} φ_n(s) ds = ∫₀ᵗ e^{−w(t−s)} φ_n(s) ds`, bounded for
/// `Re w ≥ 0`.
pub fn varphi_n_damped(w: C64, t: f64, n: usize, tau: f64, t_final: f64) -> C64 {
    if t <= tau {
        return C64::new(0.0, 0.0);
    }
    let te = t.min(t_final);
    let p = t_final - tau;
    let a = n as f64 * PI / p;
    let den = w * w + a * a;
    let tail = (-w * (t - te)).exp();
    if den.norm() < RESONANCE_TOL * a * a {
        let (v, _) = quad::adaptive_gk(|s| (-w * (te - s)).exp() * phi_n(s, n, tau, t_final), tau, te, 1e-14, 400);
        return v * tail;
    }
    let arg = a * (te - tau);
    ((-w * (te - tau)).exp() * a - a * math::cos(arg) + w * math::sin(arg)) / den * tail
}

/// Part of `varphi_n_damped(w, t) − φ_n(t)/w` without an `e^{−w·}` factor:
/// `−a(w cos(as') + a sin(as'))/(w(w² + a²))` for `tau < t ≤ t_final`.
/// It decays only like `w⁻²`.
pub fn varphi_n_algebraic(w: C64, t: f64, n: usize, tau: f64, t_final: f64) -> C64 {
    if t <= tau || t > t_final {
        return C64::new(0.0, 0.0);
    }
    let a = n as f64 * PI / (t_final - tau);
    let arg = a * (t - tau);
    -(w * math::cos(arg) + a * math::sin(arg)) * a / (w * (w * w + a * a))
}

/// Boundary datum as a function of time.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundarySignal {
    Constant(f64),
    /// `Σ c_n φ_n(t)` on `[tau, t_final]`, `n = 1..=coeffs.len()`.
    SineSeries {
        coeffs: Vec<f64>,
        tau: f64,
        t_final: f64,
    },
}

impl Default for BoundarySignal {
    fn default() -> Self {
        BoundarySignal::zero()
    }
}

impl BoundarySignal {
    pub fn zero() -> Self {
        BoundarySignal::Constant(0.0)
    }

    pub fn sine_series(coeffs: Vec<f64>, tau: f64, t_final: f64) -> Result<Self> {
        let s = BoundarySignal::SineSeries { coeffs, tau, t_final };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BoundarySignal::Constant(v) if !v.is_finite() => Err(Error::InvalidSpec("boundary value must be finite".into())),
            BoundarySignal::SineSeries { coeffs, tau, t_final } => {
                if !(*tau >= 0.0 && tau < t_final) || !t_final.is_finite() {
                    return Err(Error::InvalidSpec(format!("sine series needs 0 <= tau < T, got tau={tau}, T={t_final}")));
                }
                if coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidSpec("sine series coefficients must be finite".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            BoundarySignal::Constant(v) => *v == 0.0,
            BoundarySignal::SineSeries { coeffs, .. } => coeffs.iter().all(|c| *c == 0.0),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            BoundarySignal::Constant(v) => *v,
            BoundarySignal::SineSeries { coeffs, tau, t_final } => {
                coeffs.iter().enumerate().map(|(i, c)| c * phi_n(t, i + 1, *tau, *t_final)).sum()
            }
        }
    }

    /// `∫₀ᵗ e^{ws} s(s) ds`.
    pub fn ttransform(&self, w: C64, t: f64) -> C64 {
        match self {
            BoundarySignal::Constant(v) => ttransform_constant(*v, w, t),
            BoundarySignal::SineSeries { coeffs, tau, t_final } => {
                coeffs.iter().enumerate().map(|(i, c)| varphi_n_w(w, t, i + 1, *tau, *t_final) * *c).sum()
            }
        }
    }

    /// `∫₀ᵗ e^{−w(t−s)} s(s) ds`.
    pub fn damped(&self, w: C64, t: f64) -> C64 {
        match self {
            BoundarySignal::Constant(v) => phi1(-w * t) * (v * t),
            BoundarySignal::SineSeries { coeffs, tau, t_final } => {
                coeffs.iter().enumerate().map(|(i, c)| varphi_n_damped(w, t, i + 1, *tau, *t_final) * *c).sum()
            }
        }
    }

    /// `damped(w, t) − s(t)/w`. Requires `w ≠ 0`.
    ///
    /// The subtracted term contributes nothing to the contour integrals of
    /// the representation at interior points, and removing it makes them
    /// absolutely convergent up to the boundary.
    pub fn damped_regularized(&self, w: C64, t: f64) -> C64 {
        match self {
            BoundarySignal::Constant(v) => -(-w * t).exp() * *v / w,
            BoundarySignal::SineSeries { .. } => self.damped(w, t) - self.value(t) / w,
        }
    }

    /// Non-exponential part of [`Self::damped_regularized`]; zero unless a
    /// sine series is active at `t`.
    pub fn algebraic(&self, w: C64, t: f64) -> C64 {
        match self {
            BoundarySignal::Constant(_) => C64::new(0.0, 0.0),
            BoundarySignal::SineSeries { coeffs, tau, t_final } => {
                coeffs.iter().enumerate().map(|(k, cn)| varphi_n_algebraic(w, t, k + 1, *tau, *t_final) * *cn).sum()
            }
        }
    }

    /// Shortest time over which the exponential part of the transform at `t`
    /// is damped.
    pub fn damping_time(&self, t: f64) -> f64 {
        match self {
            BoundarySignal::SineSeries { tau, t_final, .. } if !self.is_zero() && t > *tau => {
                if t > *t_final {
                    t - t_final
                } else {
                    t - tau
                }
            }
            _ => t,
        }
    }

    /// Whether [`Self::algebraic`] is nonzero at `t`.
    pub fn needs_tails(&self, t: f64) -> bool {
        match self {
            BoundarySignal::SineSeries { tau, t_final, .. } => !self.is_zero() && t > *tau && t <= *t_final,
            _ => false,
        }
    }

    /// Largest angular frequency `Nπ/(T − τ)`; zero for constants.
    pub fn max_frequency(&self) -> f64 {
        match self {
            BoundarySignal::SineSeries { coeffs, tau, t_final } => coeffs.len() as f64 * PI / (t_final - tau),
            _ => 0.0,
        }
    }
}

/// Modulus bound for the nonzero singularities of `λ ↦ 1/(ω² + a²)`, i.e.
/// the solutions of `ω(λ) = ±ia`.
pub fn resonance_radius(a: f64, params: &ProblemParams) -> f64 {
    let kappa = params.kappa();
    let mu = {
        let (k2, q) = (kappa * kappa, a / params.d0);
        math::sqrt(math::sqrt(k2 * k2 + q * q))
    };
    mu + kappa
}

/// `Σ c_n varphi_n(λ, t)` for a sine-series signal; zero for other signals
/// with `c = 0`.
pub fn sine_series_ttransform(signal: &BoundarySignal, lambda: C64, t: f64, params: &ProblemParams) -> C64 {
    signal.ttransform(omega(lambda, params), t)
}
