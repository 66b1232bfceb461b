//! Double-double arithmetic: an unevaluated sum `hi + lo` with `|lo|` at
//! most half an ulp of `hi`, giving about 32 significant digits.
//!
//! Products use Dekker splitting so no fused multiply-add is needed.

use core::cmp::Ordering;
use core::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

pub const PI: Dd = Dd { hi: core::f64::consts::PI, lo: 1.2246467991473532e-16 };
pub const FRAC_PI_2: Dd = Dd { hi: core::f64::consts::FRAC_PI_2, lo: 6.123233995736766e-17 };
pub const LN_2: Dd = Dd { hi: core::f64::consts::LN_2, lo: 2.3190468138462996e-17 };

const SPLITTER: f64 = 134217729.0; // 2^27 + 1

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn split(a: f64) -> (f64, f64) {
    if libm::fabs(a) > 6.69692879491417e299 {
        let s = a * (1.0 / 268_435_456.0);
        let t = SPLITTER * s;
        let hi = t - (t - s);
        let lo = s - hi;
        (hi * 268435456.0, lo * 268435456.0)
    } else {
        let t = SPLITTER * a;
        let hi = t - (t - a);
        (hi, a - hi)
    }
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    if !p.is_finite() {
        return (p, 0.0);
    }
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

impl Dd {
    pub const fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    /// `hi + lo` renormalized.
    pub fn from_parts(hi: f64, lo: f64) -> Self {
        let (hi, lo) = two_sum(hi, lo);
        Dd { hi, lo }
    }

    pub const fn hi(self) -> f64 {
        self.hi
    }

    pub const fn lo(self) -> f64 {
        self.lo
    }

    /// Nearest `f64`.
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    /// Exact multiplication by `2^k`.
    pub fn ldexp(self, k: i32) -> Self {
        Dd { hi: libm::scalbn(self.hi, k), lo: libm::scalbn(self.lo, k) }
    }

    pub fn sqr(self) -> Self {
        self * self
    }

    pub fn powi(self, n: u32) -> Self {
        let mut out = Dd::from_f64(1.0);
        let mut base = self;
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                out *= base;
            }
            base = base * base;
            n >>= 1;
        }
        out
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::from_f64(libm::sqrt(self.hi));
        }
        let x = libm::sqrt(self.hi);
        let (p, e) = two_prod(x, x);
        let r = ((self.hi - p) - e + self.lo) / (2.0 * x);
        Dd::from_parts(x, r)
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite()
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd::from_f64(x)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Add<f64> for Dd {
    type Output = Dd;
    fn add(self, o: f64) -> Dd {
        let (s, e) = two_sum(self.hi, o);
        let (hi, lo) = quick_two_sum(s, e + self.lo);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Sub<f64> for Dd {
    type Output = Dd;
    fn sub(self, o: f64) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let (hi, lo) = quick_two_sum(p, e + (self.hi * o.lo + self.lo * o.hi));
        Dd { hi, lo }
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    fn mul(self, o: f64) -> Dd {
        let (p, e) = two_prod(self.hi, o);
        let (hi, lo) = quick_two_sum(p, e + self.lo * o);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * q1;
        let q2 = r.hi / o.hi;
        let r = r - o * q2;
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + q3
    }
}

impl Div<f64> for Dd {
    type Output = Dd;
    fn div(self, o: f64) -> Dd {
        let q1 = self.hi / o;
        let (p, e) = two_prod(q1, o);
        let (s, f) = two_sum(self.hi, -p);
        let q2 = (s + (f - e + self.lo)) / o;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }
    }
}

macro_rules! f64_lhs {
    ($($tr:ident $f:ident),*) => {$(
        impl $tr<Dd> for f64 {
            type Output = Dd;
            fn $f(self, o: Dd) -> Dd {
                Dd::from_f64(self).$f(o)
            }
        }
    )*};
}
f64_lhs!(Add add, Sub sub, Mul mul, Div div);

macro_rules! assign {
    ($($tr:ident $f:ident $op:ident),*) => {$(
        impl $tr<Dd> for Dd {
            fn $f(&mut self, o: Dd) {
                *self = (*self).$op(o);
            }
        }
        impl $tr<f64> for Dd {
            fn $f(&mut self, o: f64) {
                *self = (*self).$op(o);
            }
        }
    )*};
}
assign!(AddAssign add_assign add, SubAssign sub_assign sub, MulAssign mul_assign mul, DivAssign div_assign div);

impl PartialOrd for Dd {
    fn partial_cmp(&self, o: &Dd) -> Option<Ordering> {
        match self.hi.partial_cmp(&o.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&o.lo),
            c => c,
        }
    }
}

impl PartialEq<f64> for Dd {
    fn eq(&self, o: &f64) -> bool {
        self.hi == *o && self.lo == 0.0
    }
}

impl PartialOrd<f64> for Dd {
    fn partial_cmp(&self, o: &f64) -> Option<Ordering> {
        self.partial_cmp(&Dd::from_f64(*o))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dd(x: f64) -> Dd {
        Dd::from_f64(x)
    }

    #[test]
    fn division_round_trips() {
        for &(a, b) in &[(1.0, 3.0), (2.0, 3.0), (1.0, 7.0), (-5.5, 0.1), (1e-200, 3e10)] {
            let q = dd(a) / dd(b);
            let back = q * dd(b) - dd(a);
            assert!(libm::fabs(back.hi()) <= 1e-31 * libm::fabs(a), "{a}/{b}");
            let q2 = dd(a) / b;
            assert!(libm::fabs((q2 - q).hi()) <= 1e-31 * libm::fabs(q.hi()));
        }
    }

    #[test]
    fn products_keep_the_rounding_error() {
        let p = dd(0.1) * dd(0.3);
        // 0.1·0.3 in binary64 operands is 0.03 + 1.6653345369377347e-18 exactly to 32 digits
        assert_eq!(p.hi(), 0.03);
        assert!(libm::fabs(p.lo() - 1.6653345369377347e-18) < 1e-33);
        let s = dd(1.0) + dd(1e-20);
        assert_eq!((s - 1.0).hi(), 1e-20);
    }

    #[test]
    fn sqrt_squares_back() {
        let r = dd(2.0).sqrt();
        assert!(libm::fabs((r * r - 2.0).hi()) < 1e-31);
    }

    #[test]
    fn constants_are_consistent() {
        assert!(libm::fabs((FRAC_PI_2 * 2.0 - PI).hi()) < 1e-32);
        // ln 2 against the series Σ 1/(k 2^k)
        let mut s = dd(0.0);
        for k in 1..110 {
            s += dd(1.0) / (dd(k as f64) * dd(2.0).powi(k));
        }
        assert!(libm::fabs((s - LN_2).hi()) < 1e-31);
    }
}
