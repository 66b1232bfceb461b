use alloc::string::String;
use core::fmt;

use crate::math::C64;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A physical or geometric parameter violates its domain.
    InvalidParams(String),
    /// Boundary-condition kind and Robin coefficients disagree, or the data
    /// are outside the solver's domain.
    InvalidSpec(String),
    /// A Robin-path kernel was handed the Neumann marker.
    NeumannNotAllowed,
    /// One of the factors `1 − αK₀/(2D₀)`, `βK₀/(2D₀) − 1` vanishes.
    DegenerateDenominator,
    /// The tangency discriminant is negative; the root count is one of {0, 2, 4}.
    ComplexEta,
    /// Numerical root count disagrees with the classification table.
    CountMismatch { predicted: usize, found: usize },
    /// A root of the determinant lies too close to the integration path.
    PoleOnContour { root: C64, distance: f64 },
    /// Zero evaluation time leaves the contour integrand without Gaussian decay.
    ZeroTimeUnbounded,
    /// Panel doubling did not settle below the requested tolerance.
    NotConverged { change: f64, tolerance: f64 },
    /// Pivot underflow in the dense solve.
    SingularSystem,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParams(msg) => write!(f, "invalid parameters: {msg}"),
            Error::InvalidSpec(msg) => write!(f, "invalid problem specification: {msg}"),
            Error::NeumannNotAllowed => write!(f, "Neumann marker passed to a Robin kernel"),
            Error::DegenerateDenominator => write!(f, "degenerate sigma/rho denominator"),
            Error::ComplexEta => write!(f, "tangency discriminant is negative; root count ambiguous"),
            Error::CountMismatch { predicted, found } => {
                write!(f, "root count mismatch: predicted {predicted}, found {found}")
            }
            Error::PoleOnContour { root, distance } => write!(f, "root {}{:+}i lies {distance:.3e} from the contour", root.re, root.im),
            Error::ZeroTimeUnbounded => write!(f, "contour integrand has no decay at t = 0"),
            Error::NotConverged { change, tolerance } => {
                write!(f, "quadrature not converged: relative change {change:.3e} > {tolerance:.1e}")
            }
            Error::SingularSystem => write!(f, "singular linear system"),
        }
    }
}

impl core::error::Error for Error {}
