//! Real-interval quadrature rules.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{self, C64, PI};

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre order must be at least 1");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut z = math::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if math::abs(dz) < 1e-16 {
                let (_, d) = legendre_with_derivative(n, z);
                dp = d;
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre rule on `[a, b]` split at `breaks` (sorted,
/// strictly inside) and into `panels` equal pieces between breaks.
pub fn composite_gl(a: f64, b: f64, breaks: &[f64], panels: usize, order: usize) -> Vec<(f64, f64)> {
    let (gx, gw) = gauss_legendre(order);
    let mut edges = Vec::with_capacity(breaks.len() + 2);
    edges.push(a);
    edges.extend(breaks.iter().copied().filter(|&s| s > a && s < b));
    edges.push(b);
    let total = b - a;
    let mut out = Vec::new();
    for pair in edges.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let k = math::ceil((panels as f64) * (hi - lo) / total).max(1.0) as usize;
        let h = (hi - lo) / k as f64;
        for j in 0..k {
            let mid = lo + (j as f64 + 0.5) * h;
            for (xi, wi) in gx.iter().zip(&gw) {
                out.push((mid + 0.5 * h * xi, 0.5 * h * wi));
            }
        }
    }
    out
}

const GK_X: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const GK_WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15<F: FnMut(f64) -> C64>(f: &mut F, a: f64, b: f64) -> (C64, f64) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(mid);
    let mut kron = fc * GK_WK[7];
    let mut gauss = fc * GK_WG[3];
    for j in 0..7 {
        let dx = half * GK_X[j];
        let s = f(mid - dx) + f(mid + dx);
        kron += s * GK_WK[j];
        if j % 2 == 1 {
            gauss += s * GK_WG[j / 2];
        }
    }
    (kron * half, ((kron - gauss) * half).norm())
}

/// Adaptive Gauss–Kronrod (7/15) integration of a complex integrand.
///
/// Bisects the worst interval until the summed error estimate drops below
/// `tol · max(1, |I|)` or `max_intervals` is reached. Returns the estimate and
/// its error bound.
pub fn adaptive_gk<F: FnMut(f64) -> C64>(mut f: F, a: f64, b: f64, tol: f64, max_intervals: usize) -> (C64, f64) {
    if a == b {
        return (C64::new(0.0, 0.0), 0.0);
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut parts: Vec<(f64, f64, C64, f64)> = vec![(a, b, v, e)];
    loop {
        let total: C64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= tol * total.norm().max(1.0) || parts.len() >= max_intervals {
            return (total, err);
        }
        let (idx, _) = parts.iter().enumerate().fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (lo, hi, _, _) = parts.swap_remove(idx);
        let m = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, m);
        let (v2, e2) = gk15(&mut f, m, hi);
        parts.push((lo, m, v1, e1));
        parts.push((m, hi, v2, e2));
    }
}

/// Composite Simpson rule on equally spaced samples (odd count ≥ 3).
pub fn simpson(samples: &[f64], h: f64) -> f64 {
    let n = samples.len();
    assert!(n >= 3 && n % 2 == 1, "Simpson needs an odd number of samples >= 3");
    let mut s = samples[0] + samples[n - 1];
    for (i, v) in samples.iter().enumerate().take(n - 1).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    s * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1usize, 2, 5, 8, 16, 20] {
            let (x, w) = gauss_legendre(n);
            let deg = 2 * n - 1;
            let got: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32 - 1)).sum();
            let want = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((got - want).abs() < 1e-13, "n={n}: {got} vs {want}");
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn adaptive_gk_handles_oscillation() {
        let (v, _) = adaptive_gk(|s| C64::new(0.0, 40.0 * s).exp(), 0.0, 1.0, 1e-13, 500);
        let want = (C64::new(0.0, 40.0).exp() - 1.0) / C64::new(0.0, 40.0);
        assert!((v - want).norm() < 1e-13);
    }

    #[test]
    fn simpson_exact_for_cubics() {
        let h = 0.1;
        let s: Vec<f64> = (0..11).map(|i| (i as f64 * h).powi(3)).collect();
        assert!((simpson(&s, h) - 0.25).abs() < 1e-14);
    }
}
