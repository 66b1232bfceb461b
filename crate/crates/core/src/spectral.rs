//! Closed-form spectral kernels and the root analysis of the determinant.
//!
//! Throughout, `κ = K₀/(2D₀)` and `μ = λ + iκ`. In that variable the symmetry
//! map is `ν + iκ = −μ` and the dispersion relation is `ω = D₀(μ² + κ²)`, so
//! every kernel is a combination of `e^{±iμy}`.
//!
//! The `*_scaled` variants strip the exponentially large factor that the
//! plain kernels carry in the upper half plane; they are what the solvers
//! integrate.

use alloc::vec::Vec;

use crate::math::{self, c, C64, I, PI};
use crate::params::ProblemParams;
use crate::{Error, Result};

/// Tolerance on `|Δ|` (relative to its dominant term) for accepting a root.
pub const ROOT_TOL: f64 = 1e-10;
/// Base half-width of the real `y` scan and the number of brackets on it.
pub const Y_SCAN: f64 = 50.0;
pub const Y_BRACKETS: usize = 10_000;

/// `ω(λ) = D₀λ² + iK₀λ`.
#[inline]
pub fn omega(lambda: C64, p: &ProblemParams) -> C64 {
    lambda * (lambda * p.d0 + I * p.k0)
}

/// `ν(λ) = −λ − iK₀/D₀`; the non-trivial solution of `ω(ν) = ω(λ)`.
#[inline]
pub fn nu(lambda: C64, p: &ProblemParams) -> C64 {
    -lambda - I * (p.k0 / p.d0)
}

#[inline]
fn mu(lambda: C64, p: &ProblemParams) -> C64 {
    lambda + I * p.kappa()
}

/// Robin–Robin determinant
/// `Δ(λ) = e^{−iλL}(1−iαλ)(1−iβν) − e^{−iνL}(1−iαν)(1−iβλ)`.
pub fn delta_rr(lambda: C64, p: &ProblemParams) -> Result<C64> {
    let (a, b) = (p.alpha.finite()?, p.beta.finite()?);
    Ok(delta_terms(lambda, a, b, p).0)
}

/// Δ together with the size of its rounding error, for relative checks.
/// The scale bounds each term factor by factor, so it stays meaningful
/// where a polynomial factor vanishes.
fn delta_terms(lambda: C64, a: f64, b: f64, p: &ProblemParams) -> (C64, f64) {
    let n = nu(lambda, p);
    let one = C64::new(1.0, 0.0);
    let (e1, e2) = ((-I * lambda * p.length).exp(), (-I * n * p.length).exp());
    let t1 = e1 * (one - I * a * lambda) * (one - I * b * n);
    let t2 = e2 * (one - I * a * n) * (one - I * b * lambda);
    let s1 = e1.norm() * (1.0 + a * lambda.norm()) * (1.0 + b * n.norm());
    let s2 = e2.norm() * (1.0 + a * n.norm()) * (1.0 + b * lambda.norm());
    (t1 - t2, s1.max(s2))
}

/// Robin–Dirichlet determinant `Δ_α = e^{−iλL}(1−iαλ) − e^{−iνL}(1−iαν)`.
pub fn delta_alpha(lambda: C64, p: &ProblemParams) -> Result<C64> {
    let a = p.alpha.finite()?;
    let n = nu(lambda, p);
    let one = C64::new(1.0, 0.0);
    Ok((-I * lambda * p.length).exp() * (one - I * a * lambda) - (-I * n * p.length).exp() * (one - I * a * n))
}

/// Neumann–Neumann determinant `Δ₀ = e^{−iλL} − e^{−iνL}`.
pub fn delta_zero(lambda: C64, p: &ProblemParams) -> C64 {
    (-I * lambda * p.length).exp() - (-I * nu(lambda, p) * p.length).exp()
}

/// `F_γ(λ, y) = (γκ − 1) sin(yμ) − γμ cos(yμ)`.
pub fn f_gamma(lambda: C64, y: f64, gamma: f64, p: &ProblemParams) -> C64 {
    let m = mu(lambda, p);
    let ym = m * y;
    ym.sin() * (gamma * p.kappa() - 1.0) - m * gamma * ym.cos()
}

/// `G(λ, y) = κ sin(yμ) − μ cos(yμ)`, the large-γ limit of `F_γ/γ`.
pub fn g_kernel(lambda: C64, y: f64, p: &ProblemParams) -> C64 {
    let m = mu(lambda, p);
    let ym = m * y;
    ym.sin() * p.kappa() - m * ym.cos()
}

/// `e^{2i|y|μ}`; bounded by one when `Im μ ≥ 0`.
#[inline]
pub fn wave(m: C64, y: f64) -> C64 {
    (I * m * (2.0 * math::abs(y))).exp()
}

/// `e^{i|y|μ} sin(yμ)` from a precomputed `e^{2i|y|μ}`.
#[inline]
pub fn sin_scaled(w: C64, y: f64) -> C64 {
    let s = (w - 1.0) / (2.0 * I);
    if y < 0.0 {
        -s
    } else {
        s
    }
}

/// `e^{i|y|μ} cos(yμ)` from a precomputed `e^{2i|y|μ}`.
#[inline]
pub fn cos_scaled(w: C64) -> C64 {
    (w + 1.0) * 0.5
}

/// `e^{i|y|μ} F_γ(λ, y)`.
#[inline]
pub fn f_gamma_scaled(m: C64, w: C64, y: f64, gamma: f64, kappa: f64) -> C64 {
    sin_scaled(w, y) * (gamma * kappa - 1.0) - m * gamma * cos_scaled(w)
}

/// `e^{i|y|μ} G(λ, y)`.
#[inline]
pub fn g_scaled(m: C64, w: C64, y: f64, kappa: f64) -> C64 {
    sin_scaled(w, y) * kappa - m * cos_scaled(w)
}

/// Appendix constants `σ` and `ρ` of the reduced root equation
/// `σy/(1 + ρy²) = tanh y`, obtained with `λ = i(y/L − κ)`.
pub fn sigma_rho(p: &ProblemParams) -> Result<(f64, f64)> {
    let (a, b) = (p.alpha.finite()?, p.beta.finite()?);
    let k = p.kappa();
    let den = (1.0 - a * k) * (b * k - 1.0);
    if den == 0.0 || math::abs(den) < 1e-14 {
        return Err(Error::DegenerateDenominator);
    }
    let l = p.length;
    Ok(((a - b) / (l * den), a * b / (l * l * den)))
}

/// Classification of the number of off-line roots of Δ from `(σ, ρ)`.
///
/// In the `ρ > 0, 0 < σ < 1` band the count is 0 or 4 depending on the sign
/// of the exact tangency quantity; `Err(ComplexEta)` when that quantity is
/// undefined.
pub fn root_count(sigma: f64, rho: f64) -> Result<usize> {
    if rho > 0.0 {
        if sigma <= 0.0 {
            Ok(0)
        } else if sigma >= 1.0 {
            Ok(2)
        } else if sigma > 2.0 * math::sqrt(rho) {
            Ok(4)
        } else {
            let q = tangency_quantity(sigma, rho)?;
            Ok(if q > 0.0 {
                4
            } else if q < 0.0 {
                0
            } else {
                2
            })
        }
    } else if rho == 0.0 {
        Ok(if sigma > 0.0 && sigma < 1.0 { 2 } else { 0 })
    } else {
        Ok(if sigma < 1.0 { 2 } else { 0 })
    }
}

/// `σ − (ρ/√η + √η) tanh(√η/ρ)` with
/// `η = ½σ(σ−ρ) − ρ + √((½σ(σ−ρ) − ρ)² − (1−σ)ρ²)`.
pub fn tangency_quantity(sigma: f64, rho: f64) -> Result<f64> {
    let a = 0.5 * sigma * (sigma - rho) - rho;
    let disc = a * a - (1.0 - sigma) * rho * rho;
    if disc < 0.0 {
        return Err(Error::ComplexEta);
    }
    let eta = a + math::sqrt(disc);
    if eta <= 0.0 {
        return Err(Error::ComplexEta);
    }
    let se = math::sqrt(eta);
    Ok(sigma - (rho / se + se) * math::tanh(se / rho))
}

/// Cheap approximation `σ − 2√ρ tanh(1/√ρ)` of [`tangency_quantity`].
pub fn tangency_approx(sigma: f64, rho: f64) -> f64 {
    let sr = math::sqrt(rho);
    sigma - 2.0 * sr * math::tanh(1.0 / sr)
}

/// Roots of Δ off the line `Im λ = −κ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RootReport {
    /// `None` when the classification denominators vanish.
    pub sigma: Option<f64>,
    pub rho: Option<f64>,
    /// Table prediction; `None` when degenerate or ambiguous.
    pub predicted_count: Option<usize>,
    /// Off-line roots, ordered by imaginary part descending.
    pub roots: Vec<C64>,
    /// Largest imaginary part among roots strictly above the real axis.
    pub max_upper_imag: Option<f64>,
}

impl RootReport {
    /// Report with no off-line roots; used for the Neumann–Neumann path whose
    /// determinant `Δ₀` only vanishes on the line `Im λ = −κ`.
    pub fn line_only() -> Self {
        RootReport { sigma: None, rho: None, predicted_count: None, roots: Vec::new(), max_upper_imag: None }
    }

    fn from_roots(sigma: Option<f64>, rho: Option<f64>, predicted: Option<usize>, mut roots: Vec<C64>) -> Self {
        roots.sort_by(|a, b| b.im.total_cmp(&a.im));
        let max_upper_imag =
            roots.iter().filter(|r| r.im > 0.0).map(|r| r.im).fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
        RootReport { sigma, rho, predicted_count: predicted, roots, max_upper_imag }
    }
}

/// Locates the off-line roots of the Robin–Robin determinant.
///
/// Non-degenerate parameters go through the reduced real equation
/// `σy = (1 + ρy²) tanh y`, bracketed on a scan of `y > 0` and mirrored.
/// Degenerate ones fall back to a 2-D scan of Δ.
pub fn find_roots(p: &ProblemParams) -> Result<RootReport> {
    let (a, b) = (p.alpha.finite()?, p.beta.finite()?);
    let kappa = p.kappa();
    let (sigma, rho) = match sigma_rho(p) {
        Ok(sr) => sr,
        Err(Error::DegenerateDenominator) => {
            let roots = scan_roots_2d(p, a, b);
            return Ok(RootReport::from_roots(None, None, None, roots));
        }
        Err(e) => return Err(e),
    };
    let predicted = match root_count(sigma, rho) {
        Ok(n) => Some(n),
        Err(Error::ComplexEta) => None,
        Err(e) => return Err(e),
    };
    let mut roots = Vec::new();
    for y in positive_y_roots(sigma, rho) {
        for s in [1.0, -1.0] {
            let lam = I * (s * y / p.length - kappa);
            let (d, scale) = delta_terms(lam, a, b, p);
            if d.norm() < ROOT_TOL * scale.max(1.0) {
                roots.push(lam);
            }
        }
    }
    if let Some(n) = predicted {
        if n != roots.len() {
            return Err(Error::CountMismatch { predicted: n, found: roots.len() });
        }
    }
    Ok(RootReport::from_roots(Some(sigma), Some(rho), predicted, roots))
}

fn reduced(sigma: f64, rho: f64, y: f64) -> f64 {
    sigma * y - (1.0 + rho * y * y) * math::tanh(y)
}

/// Positive solutions of `σy = (1 + ρy²) tanh y`.
fn positive_y_roots(sigma: f64, rho: f64) -> Vec<f64> {
    // Roots sit at |y| = O(max(|σ|/|ρ|, 1/√|ρ|)); the base window is extended
    // geometrically to cover that scale.
    let mut ymax = Y_SCAN;
    if rho != 0.0 {
        let ar = math::abs(rho);
        ymax = ymax.max(2.0 * (1.0 + math::abs(sigma)) / ar + 2.0 / math::sqrt(ar)).min(1e8);
    }
    let h = Y_SCAN / Y_BRACKETS as f64;
    let mut grid: Vec<f64> = (0..=Y_BRACKETS).map(|i| if i == 0 { 1e-3 * h } else { i as f64 * h }).collect();
    if ymax > Y_SCAN {
        let extra = Y_BRACKETS;
        let ratio = math::exp(math::ln(ymax / Y_SCAN) / extra as f64);
        let mut y = Y_SCAN;
        for _ in 0..extra {
            y *= ratio;
            grid.push(y);
        }
    }
    let mut out = Vec::new();
    let mut prev = (grid[0], reduced(sigma, rho, grid[0]));
    for &y in &grid[1..] {
        let gy = reduced(sigma, rho, y);
        if gy == 0.0 {
            out.push(y);
        } else if prev.1 != 0.0 && (prev.1 < 0.0) != (gy < 0.0) {
            out.push(bisect(|t| reduced(sigma, rho, t), prev.0, y));
        }
        prev = (y, gy);
    }
    out
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `dΔ/dλ` of the Robin–Robin determinant.
fn delta_derivative(lambda: C64, a: f64, b: f64, p: &ProblemParams) -> C64 {
    let n = nu(lambda, p);
    let l = p.length;
    let one = C64::new(1.0, 0.0);
    let e1 = (-I * lambda * l).exp();
    let e2 = (-I * n * l).exp();
    let d1 = e1 * ((-I * l) * (one - I * a * lambda) * (one - I * b * n) - I * a * (one - I * b * n) + (one - I * a * lambda) * (I * b));
    let d2 = e2 * ((I * l) * (one - I * a * n) * (one - I * b * lambda) + I * a * (one - I * b * lambda) - (one - I * a * n) * (I * b));
    d1 - d2
}

/// Grid search for local minima of `|Δ|` over `[−20, 20] × [−4κ, 4κ]`,
/// polished by Newton; keeps the roots off the line `Im λ = −κ`.
fn scan_roots_2d(p: &ProblemParams, a: f64, b: f64) -> Vec<C64> {
    let kappa = p.kappa();
    let (re_lo, re_hi) = (-20.0, 20.0);
    let (im_lo, im_hi) = (-4.0 * kappa, 4.0 * kappa.max(1e-3));
    let (nr, ni) = (801usize, 201usize);
    let at =
        |i: usize, j: usize| c(re_lo + (re_hi - re_lo) * i as f64 / (nr - 1) as f64, im_lo + (im_hi - im_lo) * j as f64 / (ni - 1) as f64);
    let mut mag = alloc::vec![0.0; nr * ni];
    for i in 0..nr {
        for j in 0..ni {
            mag[i * ni + j] = delta_terms(at(i, j), a, b, p).0.norm();
        }
    }
    let mut roots: Vec<C64> = Vec::new();
    for i in 1..nr - 1 {
        for j in 1..ni - 1 {
            let v = mag[i * ni + j];
            let is_min = (i - 1..=i + 1).all(|ii| (j - 1..=j + 1).all(|jj| (ii == i && jj == j) || mag[ii * ni + jj] >= v));
            if !is_min {
                continue;
            }
            let mut z = at(i, j);
            for _ in 0..60 {
                let d = delta_terms(z, a, b, p).0;
                let dz = d / delta_derivative(z, a, b, p);
                if !math::is_finite(dz) {
                    break;
                }
                z -= dz;
                if dz.norm() < 1e-15 * (1.0 + z.norm()) {
                    break;
                }
            }
            let (d, scale) = delta_terms(z, a, b, p);
            let off_line = math::abs(z.im + kappa) > 1e-6;
            let inside = z.re >= re_lo && z.re <= re_hi && z.im >= im_lo && z.im <= im_hi;
            if d.norm() < ROOT_TOL * scale.max(1.0) && off_line && inside && roots.iter().all(|r| (r - z).norm() > 1e-8) {
                roots.push(z);
            }
        }
    }
    roots
}

/// Large-`n` root location `nπ/L − iκ`.
pub fn asymptotic_roots(n: usize, p: &ProblemParams) -> C64 {
    c(n as f64 * PI / p.length, -p.kappa())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Robin;

    fn params(d0: f64, k0: f64, l: f64, a: f64, b: f64) -> ProblemParams {
        ProblemParams::new(d0, k0, l, a, b).unwrap()
    }

    #[test]
    fn omega_values() {
        let p = params(1.0, 0.5, 1.0, 0.0, 0.0);
        assert_eq!(omega(C64::new(0.0, 0.0), &p), C64::new(0.0, 0.0));
        assert!((omega(C64::new(1.0, 0.0), &p) - c(1.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn nu_values() {
        let p = params(0.5, 1.0, 1.0, 0.0, 0.0);
        assert!((nu(C64::new(0.0, 0.0), &p) - c(0.0, -2.0)).norm() < 1e-15);
        let fixed = c(0.0, -p.k0 / (2.0 * p.d0));
        assert!((nu(fixed, &p) - fixed).norm() < 1e-15);
        let heat = params(1.0, 0.0, 1.0, 0.0, 0.0);
        let z = c(0.3, 1.7);
        assert_eq!(nu(z, &heat), -z);
    }

    #[test]
    fn delta_rr_values() {
        let p = params(0.5, 1.0, 1.0, 0.2, 0.7);
        assert!(delta_rr(c(0.0, -1.0), &p).unwrap().norm() < 1e-15);
        let dd = params(1.0, 0.0, 1.0, 0.0, 0.0);
        assert!(delta_rr(c(PI, 0.0), &dd).unwrap().norm() < 1e-15);
        let ph = params(0.5, 1.0, 1.0, 0.5, 0.5);
        assert!(delta_rr(C64::new(0.0, 0.0), &ph).unwrap().norm() < 1e-15);
    }

    #[test]
    fn delta_rejects_neumann() {
        let p = ProblemParams::new(1.0, 0.0, 1.0, Robin::Neumann, Robin::Neumann).unwrap();
        assert_eq!(delta_rr(c(1.0, 1.0), &p), Err(Error::NeumannNotAllowed));
        assert_eq!(find_roots(&p), Err(Error::NeumannNotAllowed));
    }

    #[test]
    fn delta_zero_roots() {
        let p = params(0.5, 1.0, 1.0, 0.0, 0.0);
        for n in 1..=2 {
            let lam = c(n as f64 * PI / p.length, -p.kappa());
            assert!(delta_zero(lam, &p).norm() < 1e-14);
        }
        let p1 = params(0.5, 1.0, 1.0, 1.0, 0.0);
        assert!(delta_alpha(c(0.0, -1.0), &p1).unwrap().norm() < 1e-15);
    }

    #[test]
    fn f_gamma_edge_values() {
        let p = params(0.5, 1.0, 1.0, 0.0, 0.0);
        let lam = c(0.4, 0.9);
        let m = lam + I * p.kappa();
        assert!((f_gamma(lam, 0.0, 1.3, &p) + m * 1.3).norm() < 1e-14);
        assert!((f_gamma(lam, 0.6, 0.0, &p) + (m * 0.6).sin()).norm() < 1e-14);
        assert!((g_kernel(lam, 0.0, &p) + m).norm() < 1e-14);
        let heat = params(1.0, 0.0, 1.0, 0.0, 0.0);
        assert!((g_kernel(lam, 0.3, &heat) + lam * (lam * 0.3).cos()).norm() < 1e-14);
    }

    #[test]
    fn scaled_kernels_match_plain() {
        let p = params(0.5, 1.0, 1.0, 0.0, 0.0);
        let lam = c(-2.3, 1.1);
        let m = lam + I * p.kappa();
        for y in [0.7, -0.4, 0.0] {
            let w = wave(m, y);
            let plain = f_gamma(lam, y, 0.8, &p) * (I * m * math::abs(y)).exp();
            assert!((f_gamma_scaled(m, w, y, 0.8, p.kappa()) - plain).norm() < 1e-13);
            let gp = g_kernel(lam, y, &p) * (I * m * math::abs(y)).exp();
            assert!((g_scaled(m, w, y, p.kappa()) - gp).norm() < 1e-13);
        }
    }

    #[test]
    fn sigma_rho_values() {
        assert_eq!(sigma_rho(&params(1.0, 0.5, 1.0, 0.7, 0.7)).unwrap().0, 0.0);
        let (s, r) = sigma_rho(&params(0.5, 1.0, 1.0, 0.5, 0.5)).unwrap();
        assert!(s.abs() < 1e-15 && (r + 1.0).abs() < 1e-14);
        assert_eq!(sigma_rho(&params(1.0, 0.5, 1.0, 0.0, 0.0)).unwrap(), (0.0, 0.0));
        // alpha = 2 D0 / K0 kills the first factor
        assert_eq!(sigma_rho(&params(0.5, 1.0, 1.0, 1.0, 0.0)), Err(Error::DegenerateDenominator));
    }

    #[test]
    fn root_count_table_rows() {
        assert_eq!(root_count(-0.5, 0.3), Ok(0));
        assert_eq!(root_count(0.0, 0.3), Ok(0));
        assert_eq!(root_count(1.5, 0.3), Ok(2));
        assert_eq!(root_count(0.5, 0.0), Ok(2));
        assert_eq!(root_count(1.0, 0.0), Ok(0));
        assert_eq!(root_count(-3.0, 0.0), Ok(0));
        assert_eq!(root_count(0.5, -1.0), Ok(2));
        assert_eq!(root_count(1.2, -1.0), Ok(0));
        // sigma > 2 sqrt(rho)
        assert_eq!(root_count(0.9, 0.1), Ok(4));
    }

    #[test]
    fn philip_roots() {
        let p = params(0.5, 1.0, 1.0, 0.5, 0.5);
        let rep = find_roots(&p).unwrap();
        assert_eq!(rep.predicted_count, Some(2));
        assert_eq!(rep.roots.len(), 2);
        assert!((rep.roots[0] - C64::new(0.0, 0.0)).norm() < 1e-12);
        assert!((rep.roots[1] - c(0.0, -2.0)).norm() < 1e-12);
        for r in &rep.roots {
            assert!(delta_rr(*r, &p).unwrap().norm() < 1e-12);
        }
        assert_eq!(rep.max_upper_imag, None);
    }

    #[test]
    fn dirichlet_has_no_off_line_roots() {
        let rep = find_roots(&params(1.0, 0.5, 1.0, 0.0, 0.0)).unwrap();
        assert!(rep.roots.is_empty());
        assert_eq!(rep.predicted_count, Some(0));
    }

    #[test]
    fn roots_pair_about_fixed_point() {
        let p = params(1.0, 0.5, 1.0, 0.3, 1.9);
        let rep = find_roots(&p).unwrap();
        let sum_target = c(0.0, -p.k0 / p.d0);
        for r in &rep.roots {
            assert!(rep.roots.iter().any(|s| (r + s - sum_target).norm() < 1e-10));
        }
    }

    #[test]
    fn degenerate_params_use_2d_scan() {
        // alpha = 2 D0 / K0 = 1 and beta = 0.5
        let p = params(0.5, 1.0, 1.0, 1.0, 0.5);
        let rep = find_roots(&p).unwrap();
        assert_eq!(rep.sigma, None);
        for r in &rep.roots {
            assert!(delta_rr(*r, &p).unwrap().norm() < 1e-9);
            assert!(r.re.abs() < 1e-8, "off-line roots lie on the imaginary axis: {r}");
        }
    }

    #[test]
    fn asymptotic_root_locations() {
        let heat = params(1.0, 0.0, 1.0, 0.0, 0.0);
        assert!((asymptotic_roots(3, &heat) - c(3.0 * PI, 0.0)).norm() < 1e-14);
        let p = params(0.5, 1.0, 1.0, 0.0, 0.0);
        assert!((asymptotic_roots(1, &p) - c(PI, -1.0)).norm() < 1e-14);
        for n in 1..6 {
            assert_eq!(asymptotic_roots(n, &p).im, -1.0);
        }
    }
}
