//! Double-double evaluation of the collocation system.
//!
//! For long horizons the entries of the control system are integrals whose
//! integrands exceed their values by many orders of magnitude, and the
//! systems reach condition numbers near `10¹⁸`. Here rows are integrated
//! and solved with about 32 significant digits. Arithmetic comes from
//! `twofloat`; `exp`, `sin` and `cos` are evaluated here because the crate's
//! own versions are not accurate to full double-double precision.

use alloc::format;
use alloc::vec::Vec;
use core::ops::{Add, Div, Mul, Neg, Sub};

use crate::contour::{self, AccuracyProfile, Contour, Part};
use crate::control::{ControlProblem, ControlSystem};
use crate::dd::{Dd, FRAC_PI_2, LN_2, PI};
use crate::linalg::{Matrix, Svd};
use crate::math;
use crate::quad;
use crate::spectral::{self, RootReport};
use crate::transforms::{resonance_radius, InitialData};
use crate::{Error, Result};

/// Imaginary residue allowed in a row entry, relative to `1 + |value|`.
pub const IMAG_TOL: f64 = 1e-20;

/// Relative distance from a resonance `ω = ±ia` below which the basis
/// transform is integrated directly instead of cancelling in closed form.
const RESONANCE_GAP: f64 = 1e-3;

pub const fn dd(x: f64) -> Dd {
    Dd::from_f64(x)
}

/// `e^x`.
pub fn exp(x: Dd) -> Dd {
    let h = x.hi();
    if h > 709.0 {
        return dd(f64::INFINITY);
    }
    if h < -745.0 {
        return dd(0.0);
    }
    let k = libm::round(h / core::f64::consts::LN_2);
    let r = (x - LN_2 * k) * (1.0 / 1024.0);
    // expm1(r), then (1 + e)² − 1 = e(e + 2) ten times
    let mut term = r;
    let mut e = r;
    for n in 2..=12 {
        term = term * r / n as f64;
        e += term;
    }
    for _ in 0..10 {
        e = e * (e + 2.0);
    }
    (e + 1.0).ldexp(k as i32)
}

/// `(sin x, cos x)`.
pub fn sin_cos(x: Dd) -> (Dd, Dd) {
    let k = libm::round(x.hi() / core::f64::consts::FRAC_PI_2);
    let r = x - FRAC_PI_2 * k;
    let r2 = r * r;
    let (mut ts, mut s) = (r, r);
    let (mut tc, mut c) = (dd(1.0), dd(1.0));
    for n in 1..=16 {
        let n = n as f64;
        ts = -ts * r2 / ((2.0 * n) * (2.0 * n + 1.0));
        s += ts;
        tc = -tc * r2 / ((2.0 * n - 1.0) * (2.0 * n));
        c += tc;
    }
    match (k as i64).rem_euclid(4) {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}

/// Complex double-double number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cd {
    pub re: Dd,
    pub im: Dd,
}

impl Cd {
    pub const fn new(re: Dd, im: Dd) -> Self {
        Cd { re, im }
    }

    pub const fn real(re: Dd) -> Self {
        Cd { re, im: dd(0.0) }
    }

    pub const fn from_f64(re: f64, im: f64) -> Self {
        Cd { re: dd(re), im: dd(im) }
    }

    pub const fn zero() -> Self {
        Cd::from_f64(0.0, 0.0)
    }

    pub const fn one() -> Self {
        Cd::from_f64(1.0, 0.0)
    }

    pub const fn i() -> Self {
        Cd::from_f64(0.0, 1.0)
    }

    pub fn scale(self, s: Dd) -> Self {
        Cd { re: self.re * s, im: self.im * s }
    }

    /// `i·z`.
    pub fn mul_i(self) -> Self {
        Cd { re: -self.im, im: self.re }
    }

    pub fn norm(self) -> f64 {
        libm::hypot(self.re.hi(), self.im.hi())
    }

    pub fn to_c64(self) -> math::C64 {
        math::C64::new(self.re.hi() + self.re.lo(), self.im.hi() + self.im.lo())
    }

    pub fn exp(self) -> Self {
        let m = exp(self.re);
        if m.hi() == 0.0 {
            return Cd::zero();
        }
        let (s, c) = sin_cos(self.im);
        Cd { re: m * c, im: m * s }
    }
}

impl Add for Cd {
    type Output = Cd;
    fn add(self, o: Cd) -> Cd {
        Cd { re: self.re + o.re, im: self.im + o.im }
    }
}

impl Sub for Cd {
    type Output = Cd;
    fn sub(self, o: Cd) -> Cd {
        Cd { re: self.re - o.re, im: self.im - o.im }
    }
}

impl Neg for Cd {
    type Output = Cd;
    fn neg(self) -> Cd {
        Cd { re: -self.re, im: -self.im }
    }
}

impl Mul for Cd {
    type Output = Cd;
    fn mul(self, o: Cd) -> Cd {
        Cd { re: self.re * o.re - self.im * o.im, im: self.re * o.im + self.im * o.re }
    }
}

impl Mul<Dd> for Cd {
    type Output = Cd;
    fn mul(self, s: Dd) -> Cd {
        self.scale(s)
    }
}

impl Mul<f64> for Cd {
    type Output = Cd;
    fn mul(self, s: f64) -> Cd {
        Cd { re: self.re * s, im: self.im * s }
    }
}

impl Div for Cd {
    type Output = Cd;
    fn div(self, o: Cd) -> Cd {
        // scale by the larger component to keep |o|² in range
        let s = libm::fmax(libm::fabs(o.re.hi()), libm::fabs(o.im.hi()));
        let (c, d) = (o.re / s, o.im / s);
        let den = c * c + d * d;
        let (a, b) = (self.re / s, self.im / s);
        Cd { re: (a * c + b * d) / den, im: (b * c - a * d) / den }
    }
}

impl Div<f64> for Cd {
    type Output = Cd;
    fn div(self, s: f64) -> Cd {
        Cd { re: self.re / s, im: self.im / s }
    }
}

impl Add<f64> for Cd {
    type Output = Cd;
    fn add(self, s: f64) -> Cd {
        Cd { re: self.re + s, im: self.im }
    }
}

impl Sub<f64> for Cd {
    type Output = Cd;
    fn sub(self, s: f64) -> Cd {
        Cd { re: self.re - s, im: self.im }
    }
}

/// `(e^z − 1)/z`.
pub fn phi1(z: Cd) -> Cd {
    if z.norm() < 0.5 {
        let mut term = Cd::one();
        let mut sum = term;
        for k in 2..40 {
            term = (term * z) / k as f64;
            sum = sum + term;
        }
        sum
    } else {
        (z.exp() - 1.0) / z
    }
}

/// `(e^z − 1 − z)/z²`.
pub fn phi2(z: Cd) -> Cd {
    if z.norm() < 0.5 {
        let mut term = Cd::from_f64(0.5, 0.0);
        let mut sum = term;
        for k in 3..40 {
            term = (term * z) / k as f64;
            sum = sum + term;
        }
        sum
    } else {
        (z.exp() - 1.0 - z) / (z * z)
    }
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`, Newton-polished from the
/// double-precision rule.
pub fn gauss_legendre(n: usize) -> (Vec<Dd>, Vec<Dd>) {
    let (x0, _) = quad::gauss_legendre(n);
    let mut xs = Vec::with_capacity(n);
    let mut ws = Vec::with_capacity(n);
    for xi in x0 {
        let mut x = dd(xi);
        let mut dp = dd(1.0);
        for _ in 0..3 {
            let (p, d) = legendre(n, x);
            dp = d;
            x -= p / d;
        }
        let (_, d) = legendre(n, x);
        dp = if d.hi() != 0.0 { d } else { dp };
        xs.push(x);
        ws.push(dd(2.0) / ((1.0 - x * x) * dp * dp));
    }
    (xs, ws)
}

fn legendre(n: usize, x: Dd) -> (Dd, Dd) {
    let (mut p0, mut p1) = (dd(1.0), x);
    for k in 1..n {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let d = (x * p1 - p0) * n as f64 / (x * x - 1.0);
    (p1, d)
}

/// Double-double quadrature rules on the geometry of an `f64` contour.
#[derive(Debug, Clone)]
pub struct DdContour {
    pub geometry: Contour,
    gx: Vec<Dd>,
    gw: Vec<Dd>,
}

impl DdContour {
    pub fn new(geometry: Contour) -> Self {
        let (gx, gw) = gauss_legendre(geometry.profile().order);
        DdContour { geometry, gx, gw }
    }

    fn panels(&self, edges: &[f64]) -> Vec<(Dd, Dd)> {
        let mut out = Vec::with_capacity(edges.len() * self.gx.len());
        for pair in edges.windows(2) {
            let (lo, hi) = (dd(pair[0]), dd(pair[1]));
            let mid = (lo + hi) * 0.5;
            let half = (hi - lo) * 0.5;
            for (x, w) in self.gx.iter().zip(&self.gw) {
                out.push((mid + half * *x, half * *w));
            }
        }
        out
    }

    /// `(λ, weight·dλ, part)` at refinement `level`.
    pub fn rule(&self, level: usize) -> Vec<(Cd, Cd, Part)> {
        let g = &self.geometry;
        let (s, c) = sin_cos(dd(g.ray_angle));
        let vertex = Cd::new(dd(0.0), dd(g.offset_h));
        let dir_r = Cd::new(c, s);
        let dir_l = Cd::new(-c, s);
        let radial = self.panels(&g.ray_edges(level));
        let mut out = Vec::new();
        for &(r, w) in radial.iter().rev() {
            out.push((vertex + dir_l.scale(r), -dir_l.scale(w), Part::Ray));
        }
        for &(r, w) in &radial {
            out.push((vertex + dir_r.scale(r), dir_r.scale(w), Part::Ray));
        }
        if g.has_tails() {
            let big_s = dd(g.truncation_s);
            let (end_l, end_r) = (vertex + dir_l.scale(big_s), vertex + dir_r.scale(big_s));
            let up = self.panels(&g.tail_edges(level));
            for &(r, w) in up.iter().rev() {
                out.push((end_l + Cd::real(r).mul_i(), -Cd::real(w).mul_i(), Part::Tail));
            }
            for &(r, w) in &up {
                out.push((end_r + Cd::real(r).mul_i(), Cd::real(w).mul_i(), Part::Tail));
            }
        }
        out
    }

    /// Integrates `m` integrands with the same acceptance test as
    /// [`contour::integrate_parts`].
    pub fn integrate<F: Fn(Cd, Part, &mut [Cd])>(&self, m: usize, f: F) -> Result<Vec<Cd>> {
        let profile = self.geometry.profile();
        let tol = profile.rel_quad_tol;
        let sum = |level: usize| -> (Vec<Cd>, Vec<f64>) {
            let mut acc = alloc::vec![Cd::zero(); m];
            let mut mag = alloc::vec![0.0; m];
            let mut buf = alloc::vec![Cd::zero(); m];
            for (z, w, part) in self.rule(level) {
                buf.iter_mut().for_each(|b| *b = Cd::zero());
                f(z, part, &mut buf);
                for k in 0..m {
                    let term = buf[k] * w;
                    acc[k] = acc[k] + term;
                    mag[k] += term.norm();
                }
            }
            (acc, mag)
        };
        let (mut prev, _) = sum(0);
        let mut worst = 0.0;
        for level in 1..=profile.max_refinements.max(1) {
            let (cur, mag) = sum(level);
            worst = 0.0;
            let mut ok = true;
            for k in 0..m {
                let change = (cur[k] - prev[k]).norm() / mag[k].max(f64::MIN_POSITIVE);
                if !change.is_finite() {
                    return Err(Error::NotConverged { change, tolerance: tol });
                }
                worst = f64::max(worst, change);
                ok &= change <= tol;
            }
            if ok {
                return Ok(cur);
            }
            prev = cur;
        }
        Err(Error::NotConverged { change: worst, tolerance: tol })
    }
}

/// Initial-data transforms in double-double.
fn initial_value(d: &InitialData, x: Dd, l: f64) -> Dd {
    match d {
        InitialData::PiecewiseStep { height, split } => {
            if x < *split {
                dd(*height)
            } else if x == *split {
                dd(0.5 * height)
            } else {
                dd(0.0)
            }
        }
        InitialData::HalfCosine => sin_cos(PI * x / (2.0 * l)).1,
        InitialData::FullSine => sin_cos(PI * x / l).0,
        InitialData::ExpSine { rate, mode } => exp(x * *rate) * sin_cos(PI * x * *mode as f64 / l).0,
        InitialData::Constant(v) => dd(*v),
        InitialData::Tabulated(s) => {
            let xf = x.hi();
            let j = s.partition_point(|p| p.0 <= xf).clamp(1, s.len() - 1);
            let (x0, y0) = s[j - 1];
            let (x1, y1) = s[j];
            dd(y0) + (x - x0) * (dd(y1) - y0) / (dd(x1) - x0)
        }
        InitialData::Sum(parts) => parts.iter().fold(dd(0.0), |acc, (w, p)| acc + initial_value(p, x, l) * *w),
    }
}

fn transform_quadrature(d: &InitialData, lam: Cd, l: f64, right: bool) -> Cd {
    let mut breaks = alloc::vec![0.0];
    breaks.extend(d.breakpoints().into_iter().filter(|b| *b > 0.0 && *b < l));
    breaks.push(l);
    let (gx, gw) = gauss_legendre(24);
    let mut sum = Cd::zero();
    for pair in breaks.windows(2) {
        let pieces = 16;
        for j in 0..pieces {
            let lo = dd(pair[0]) + (dd(pair[1]) - pair[0]) * j as f64 / pieces as f64;
            let hi = dd(pair[0]) + (dd(pair[1]) - pair[0]) * (j + 1) as f64 / pieces as f64;
            let (mid, half) = ((lo + hi) * 0.5, (hi - lo) * 0.5);
            for (x, w) in gx.iter().zip(&gw) {
                let xx = mid + half * *x;
                let arg = if right { (lam * Cd::real(dd(l) - xx)).mul_i() } else { -(lam * Cd::real(xx)).mul_i() };
                sum = sum + arg.exp().scale(initial_value(d, xx, l) * half * *w);
            }
        }
    }
    sum
}

/// `∫₀ᴸ e^{−iλx} θ₀ dx`, or `∫₀ᴸ e^{iλ(L−x)} θ₀ dx` when `right`.
pub fn initial_transform(d: &InitialData, lam: Cd, l: f64, right: bool) -> Cd {
    let il = lam.mul_i();
    match d {
        InitialData::PiecewiseStep { height, split } => {
            let s = *split;
            if right {
                (il.scale(dd(l) - s)).exp() * phi1(il * s) * (dd(*height) * s)
            } else {
                phi1(-il * s) * (dd(*height) * s)
            }
        }
        InitialData::Constant(v) => phi1(if right { il * l } else { -il * l }) * (dd(*v) * l),
        InitialData::HalfCosine => {
            let den = (lam * lam).scale(dd(l) * l * 4.0) - Cd::real(PI * PI);
            if den.norm() < 1e-6 * (1.0 + (lam * lam).norm() * l * l) {
                return transform_quadrature(d, lam, l, right);
            }
            let num = if right { il * (2.0 * l) * (il * l).exp() + Cd::real(PI) } else { il * (2.0 * l) + (-il * l).exp().scale(PI) };
            -(num * (2.0 * l)) / den
        }
        InitialData::FullSine => initial_transform(&InitialData::ExpSine { rate: 0.0, mode: 1 }, lam, l, right),
        InitialData::ExpSine { rate, mode } => {
            let k = PI * *mode as f64 / l;
            let a = -il + *rate;
            let den = a * a + Cd::real(k * k);
            if den.norm() < 1e-6 * (1.0 + (a * a).norm()) {
                return transform_quadrature(d, lam, l, right);
            }
            let sign = if mode % 2 == 0 { 1.0 } else { -1.0 };
            let num = if right { (il * l).exp() - Cd::real(exp(dd(*rate) * l) * sign) } else { Cd::one() - (a * l).exp() * sign };
            num.scale(k) / den
        }
        InitialData::Tabulated(s) => {
            let mut sum = Cd::zero();
            for w in s.windows(2) {
                let ((x0, y0), (x1, y1)) = (w[0], w[1]);
                let h = dd(x1) - x0;
                let dy = dd(y1) - y0;
                if right {
                    let z = il.scale(h);
                    sum = sum + (il.scale(dd(l) - x1)).exp() * (phi1(z) * y0 + phi2(z).scale(dy)).scale(h);
                } else {
                    let z = -il.scale(h);
                    sum = sum + (-il * x0).exp() * (phi1(z) * y1 - phi2(z).scale(dy)).scale(h);
                }
            }
            sum
        }
        InitialData::Sum(parts) => parts.iter().fold(Cd::zero(), |acc, (w, p)| acc + initial_transform(p, lam, l, right) * *w),
    }
}

/// Double-double counterpart of [`crate::control::Assembler`].
#[derive(Debug, Clone)]
pub struct ExtendedAssembler {
    problem: ControlProblem,
    contour: DdContour,
    profile: AccuracyProfile,
}

/// Collocation system in double-double.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedRows {
    pub a: Vec<Vec<Dd>>,
    pub b: Vec<Dd>,
}

impl ExtendedRows {
    /// `A⁻¹ b` in double-double, rounded to `f64`.
    pub fn solve(&self) -> Result<Vec<f64>> {
        Ok(lu_solve(&self.a, &self.b)?.into_iter().map(Dd::to_f64).collect())
    }
}

impl ExtendedAssembler {
    pub fn new(problem: &ControlProblem, profile: &AccuracyProfile) -> Result<Self> {
        problem.validate()?;
        let p = &problem.params;
        let roots: RootReport = spectral::find_roots(p)?;
        let span = problem.t_final - problem.tau;
        let freq = problem.basis_count() as f64 * core::f64::consts::PI / span;
        let min_s = 1.5 * resonance_radius(freq, p) + 1.0;
        let geometry = contour::make_tailed_contour(p, &roots, span, problem.t_final, min_s, profile)?;
        Ok(ExtendedAssembler { problem: problem.clone(), contour: DdContour::new(geometry), profile: *profile })
    }

    /// Collocation point `x_k = (k + 1)L/(N + 2)` rounded to double-double.
    pub fn collocation_point(&self, k: usize) -> Dd {
        dd(self.problem.params.length) * (k + 1) as f64 / (self.problem.n + 2) as f64
    }

    /// `[A_1, …, A_{N+1}, B]` at `x_k`.
    pub fn row(&self, k: usize) -> Result<Vec<Dd>> {
        let x = self.collocation_point(k);
        self.row_at(x)
    }

    pub fn row_at(&self, x: Dd) -> Result<Vec<Dd>> {
        let pr = &self.problem;
        let p = &pr.params;
        let l = dd(p.length);
        if !(x > 0.0 && x < l) {
            return Err(Error::InvalidParams(format!("collocation point {} not inside (0, {})", x.hi(), p.length)));
        }
        let nb = pr.basis_count();
        let vals = self.contour.integrate(nb + 1, |lam, part, out| self.integrand(x, lam, part, out))?;
        let has_initial = !pr.initial.is_zero();
        let fourier = if has_initial { self.fourier(x)? } else { Cd::zero() };
        let mut row = Vec::with_capacity(nb + 1);
        let pref = Cd::new(dd(0.0), -(dd(1.0) / PI));
        for (k, v) in vals.into_iter().enumerate() {
            let mut z = v * pref;
            if k == nb {
                z = z + fourier;
            }
            let re = z.re;
            if libm::fabs(z.im.hi()) > IMAG_TOL * (1.0 + libm::fabs(re.hi())) {
                return Err(Error::NotConverged { change: libm::fabs(z.im.hi()), tolerance: IMAG_TOL });
            }
            row.push(re);
        }
        Ok(row)
    }

    /// Row integrand at `λ`: the basis responses in `out[..N+1]` and the
    /// free response in `out[N+1]`.
    pub fn integrand(&self, x: Dd, lam: Cd, part: Part, out: &mut [Cd]) {
        let pr = &self.problem;
        let p = &pr.params;
        let l = dd(p.length);
        let a = p.alpha.finite().unwrap_or(0.0);
        let t = dd(pr.t_final);
        let span = t - pr.tau;
        let nb = pr.basis_count();
        let kappa = dd(p.k0) / (2.0 * p.d0);
        let ik = Cd::new(dd(0.0), kappa);
        let lx = l - x;
        let m = lam + ik;
        let nu = -lam - ik - ik;
        let w = (lam * lam).scale(dd(p.d0)) + lam.mul_i() * p.k0;
        let wave = |y: Dd| (m.mul_i().scale(y * 2.0)).exp();
        let den = (Cd::one() - lam.mul_i() * a) - wave(l) * (Cd::one() - nu.mul_i() * a);
        let wx = wave(x);
        let sin_x = (wx - 1.0) * Cd::from_f64(0.0, -0.5);
        let cos_x = (wx + 1.0) * 0.5;
        let fa = sin_x.scale(kappa * a - 1.0) - m * cos_x * a;
        let right_phase = ((lam + ik + ik).mul_i().scale(lx)).exp();
        let flux = Cd::real(dd(p.k0)) - lam.mul_i() * (2.0 * p.d0);
        let common = right_phase * fa / den * flux;
        let w2 = w * w;
        let decay_span = if part == Part::Ray { (-w.scale(span)).exp() } else { Cd::zero() };
        for k in 0..nb {
            let an = PI * (k + 1) as f64 / span;
            let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
            let res = w2 + Cd::real(an * an);
            let phi = match part {
                Part::Ray if res.norm() < RESONANCE_GAP * (an.hi() * an.hi()) => varphi_quadrature(w, an, span),
                Part::Ray => (decay_span - Cd::real(dd(sign))).scale(an) / res,
                Part::Tail => Cd::real(-an * sign) / res,
            };
            out[k] = common * phi;
        }
        out[nb] = Cd::zero();
        if !pr.initial.is_zero() && part == Part::Ray {
            let decay = (-w.scale(t)).exp();
            let sn = (wave(lx) - 1.0) * Cd::from_f64(0.0, -0.5);
            let left_phase = (lam.mul_i().scale(x)).exp();
            let hr = initial_transform(&pr.initial, lam, p.length, true);
            let hn = initial_transform(&pr.initial, nu, p.length, false);
            out[nb] = decay * (right_phase * fa * hr - left_phase * sn * (Cd::one() - nu.mul_i() * a) * hn) / den;
        }
    }

    /// `(1/2π) ∫ e^{iλx − ωT} θ̂₀(λ) dλ` along `Im λ = c`, which the entire
    /// integrand allows and which keeps removable points of `θ̂₀` off the
    /// path.
    fn fourier(&self, x: Dd) -> Result<Cd> {
        let pr = &self.problem;
        let p = &pr.params;
        let t = pr.t_final;
        let shift = {
            let q = 1.0 / t;
            let grow = (-p.k0 + libm::sqrt(p.k0 * p.k0 + 4.0 * p.d0 * q)) / (2.0 * p.d0);
            libm::fmin(0.5 / p.length.max(1.0), grow)
        };
        let decay = self.profile.decay_exponent;
        let lim = libm::sqrt((decay + 1.0) / (p.d0 * t) + shift * shift);
        let width = core::f64::consts::PI / (p.length + p.k0 * t + 2.0 * p.d0 * shift * t);
        let (gx, gw) = (&self.contour.gx, &self.contour.gw);
        let eval = |panels: usize| -> (Cd, f64) {
            let h = dd(2.0 * lim) / panels as f64;
            let mut sum = Cd::zero();
            let mut mag = 0.0;
            for j in 0..panels {
                let mid = h * (j as f64 + 0.5) - lim;
                for (xi, wi) in gx.iter().zip(gw) {
                    let lam = Cd::new(mid + h * 0.5 * *xi, dd(shift));
                    let w = (lam * lam).scale(dd(p.d0)) + lam.mul_i() * p.k0;
                    let e = (lam.mul_i().scale(x) - w * t).exp();
                    let term = e * initial_transform(&pr.initial, lam, p.length, false) * (h * 0.5 * *wi);
                    sum = sum + term;
                    mag += term.norm();
                }
            }
            (sum, mag)
        };
        let tol = self.profile.rel_quad_tol;
        let mut panels = libm::ceil(2.0 * lim / width).max(8.0) as usize;
        let (mut prev, _) = eval(panels);
        let mut worst = 0.0;
        for _ in 0..self.profile.max_refinements.max(1) {
            panels *= 2;
            let (cur, mag) = eval(panels);
            let change = (cur - prev).norm() / mag.max(f64::MIN_POSITIVE);
            if change <= tol {
                return Ok(cur * (dd(0.5) / PI));
            }
            worst = change;
            prev = cur;
        }
        Err(Error::NotConverged { change: worst, tolerance: tol })
    }

    /// Builds the system from precomputed rows, keeping both the
    /// double-double entries and their rounding.
    pub fn system_from_rows(&self, rows: Vec<Result<Vec<Dd>>>) -> Result<ControlSystem> {
        let nb = self.problem.basis_count();
        let mut a = Vec::with_capacity(nb);
        let mut b = Vec::with_capacity(nb);
        let mut failed = alloc::string::String::new();
        for (k, r) in rows.into_iter().enumerate() {
            match r {
                Ok(mut row) => {
                    b.push(row.pop().unwrap());
                    a.push(row);
                }
                Err(e) => failed.push_str(&format!(" row {k}: {e:?};")),
            }
        }
        if !failed.is_empty() {
            return Err(Error::InvalidSpec(format!("assembly failed:{failed}")));
        }
        let rows_f: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|v| v.to_f64()).collect()).collect();
        let af = Matrix::from_rows(&rows_f);
        let condition = Svd::new(&af).condition();
        let bf = b.iter().map(|v| v.to_f64()).collect();
        Ok(ControlSystem { a: af, b: bf, condition, extended: Some(ExtendedRows { a, b }) })
    }

    pub fn assemble(&self) -> Result<ControlSystem> {
        let rows = (0..self.problem.basis_count()).map(|k| self.row(k)).collect();
        self.system_from_rows(rows)
    }
}

/// `∫₀^P e^{−w(P−s)} sin(a s) ds` by composite Gauss–Legendre.
fn varphi_quadrature(w: Cd, a: Dd, span: Dd) -> Cd {
    let (gx, gw) = gauss_legendre(24);
    let pieces = 16;
    let h = span / pieces as f64;
    let mut sum = Cd::zero();
    for j in 0..pieces {
        let mid = h * (j as f64 + 0.5);
        for (x, wt) in gx.iter().zip(&gw) {
            let s = mid + h * 0.5 * *x;
            let k = (-w.scale(span - s)).exp();
            sum = sum + k.scale(sin_cos(a * s).0 * h * 0.5 * *wt);
        }
    }
    sum
}

/// `A⁻¹ b` by LU with partial pivoting in double-double.
pub fn lu_solve(a: &[Vec<Dd>], b: &[Dd]) -> Result<Vec<Dd>> {
    let n = b.len();
    if a.len() != n || a.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidParams("system must be square".into()));
    }
    let mut m: Vec<Vec<Dd>> = a.to_vec();
    let mut rhs = b.to_vec();
    let scale = m.iter().flat_map(|r| r.iter()).fold(0.0f64, |acc, v| acc.max(libm::fabs(v.hi())));
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| libm::fabs(m[i][col].hi()).total_cmp(&libm::fabs(m[j][col].hi()))).unwrap();
        if !(libm::fabs(m[piv][col].hi()) > 1e-300 * scale) {
            return Err(Error::SingularSystem);
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..n {
                let v = m[col][c];
                m[r][c] -= f * v;
            }
            let v = rhs[col];
            rhs[r] -= f * v;
        }
    }
    let mut x = alloc::vec![dd(0.0); n];
    for r in (0..n).rev() {
        let mut s = rhs[r];
        for c in r + 1..n {
            s -= m[r][c] * x[c];
        }
        x[r] = s / m[r][r];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ProblemParams;

    fn close(a: Dd, hi: f64, lo: f64, tol: f64) -> bool {
        let d = (a - dd(hi)) - lo;
        libm::fabs(d.hi()) <= tol * libm::fabs(hi)
    }

    #[test]
    fn exp_matches_reference_digits() {
        // e = 2.718281828459045 + 1.4456468917292502e-16
        assert!(close(exp(dd(1.0)), core::f64::consts::E, 1.4456468917292502e-16, 1e-30));
        // e^{-36}
        assert!(close(exp(dd(-36.0)), 2.3195228302435696e-16, -2.4569853636432666e-32, 1e-29));
        let x = dd(0.37);
        let prod = exp(x) * exp(-x) - 1.0;
        assert!(libm::fabs(prod.hi()) < 1e-31);
    }

    #[test]
    fn sin_cos_identities() {
        for &v in &[0.3, 2.0, -7.25, 100.5, 1234.0] {
            let (s, c) = sin_cos(dd(v));
            let one = s * s + c * c - 1.0;
            assert!(libm::fabs(one.hi()) < 1e-30, "{v}");
            let (s2, c2) = sin_cos(dd(v) * 2.0);
            assert!(libm::fabs((s2 - s * c * 2.0).hi()) < 1e-29);
            assert!(libm::fabs((c2 - (c * c - s * s)).hi()) < 1e-29);
        }
        let (s, _) = sin_cos(PI);
        assert!(libm::fabs(s.hi()) < 1e-31);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(12);
        let total = w.iter().fold(dd(0.0), |a, b| a + *b);
        assert!(libm::fabs((total - 2.0).hi()) < 1e-30);
        // ∫ x²² = 2/23
        let m = x.iter().zip(&w).fold(dd(0.0), |a, (xi, wi)| a + xi.powi(22) * *wi);
        assert!(libm::fabs((m - dd(2.0) / 23.0).hi()) < 1e-30);
    }

    #[test]
    fn closed_form_transforms_match_quadrature() {
        let lam = Cd::from_f64(1.7, 0.4);
        for d in [
            InitialData::PiecewiseStep { height: 1.0, split: 0.5 },
            InitialData::HalfCosine,
            InitialData::FullSine,
            InitialData::ExpSine { rate: 0.5, mode: 2 },
        ] {
            for right in [false, true] {
                let a = initial_transform(&d, lam, 1.0, right);
                let b = transform_quadrature(&d, lam, 1.0, right);
                assert!((a - b).norm() < 1e-28, "{d:?} {right}");
            }
        }
    }

    #[test]
    fn rows_agree_with_double_precision() {
        let p = ProblemParams::new(1.0, 0.5, 1.0, 1.0, 0.0).unwrap();
        let pr = ControlProblem::new(p, InitialData::PiecewiseStep { height: 1.0, split: 0.5 }, 0.5, 0.0, 2).unwrap();
        let ext = ExtendedAssembler::new(&pr, &AccuracyProfile::extended()).unwrap();
        let dbl = crate::control::Assembler::new(&pr, &AccuracyProfile::default()).unwrap();
        for (k, x) in pr.collocation_xs().into_iter().enumerate() {
            let a = ext.row(k).unwrap();
            let b = dbl.row(x).unwrap();
            for (u, v) in a.iter().zip(&b) {
                assert!(libm::fabs(u.hi() - v) < 1e-12 * (1.0 + libm::fabs(*v)), "{} vs {}", u.hi(), v);
            }
        }
    }
}
