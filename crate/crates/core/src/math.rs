//! Scalar helpers shared by the kernels.
//!
//! `core` has no transcendental functions for `f64`, so the real ones are
//! routed through `libm`; complex arithmetic uses `num-complex` built against
//! the same backend.

pub use num_complex::Complex64 as C64;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };
pub const PI: f64 = core::f64::consts::PI;

/// Below this modulus `(e^z − 1)/z` switches to its Taylor polynomial.
pub const SERIES_SWITCH: f64 = 1e-6;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}
#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}
#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}
#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}
#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}
#[inline]
pub fn tan(x: f64) -> f64 {
    libm::tan(x)
}
#[inline]
pub fn tanh(x: f64) -> f64 {
    libm::tanh(x)
}
#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}
#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}
#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}
#[inline]
pub fn powi(x: f64, n: i32) -> f64 {
    libm::pow(x, n as f64)
}

#[inline]
pub fn is_finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// `e^z − 1` without cancellation for small `|z|`.
pub fn expm1(z: C64) -> C64 {
    let (s, co) = (sin(z.im), cos(z.im));
    let half = sin(0.5 * z.im);
    let re = libm::expm1(z.re) * co - 2.0 * half * half;
    let im = exp(z.re) * s;
    c(re, im)
}

/// `(e^z − 1)/z`, entire, with the value 1 at the origin.
pub fn phi1(z: C64) -> C64 {
    if z.norm() < SERIES_SWITCH {
        // 1 + z/2 + z²/6 + z³/24
        C64::new(1.0, 0.0) + z * (0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0)))
    } else {
        expm1(z) / z
    }
}

/// `(e^z − 1 − z)/z²`, entire, with the value ½ at the origin.
pub fn phi2(z: C64) -> C64 {
    if z.norm() < 0.5 {
        let mut term = C64::new(0.5, 0.0);
        let mut sum = term;
        for k in 3..20 {
            term = term * z / k as f64;
            sum += term;
        }
        sum
    } else {
        (expm1(z) - z) / (z * z)
    }
}
