use alloc::format;

use crate::{Error, Result};

/// Robin coefficient `γ` in `θ − γ θ_x = datum`.
///
/// `γ = 0` is a Dirichlet end. The Neumann end is the `γ → ∞` limit and is
/// kept as its own variant; it is only accepted by the Neumann–Neumann path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Robin {
    Coefficient(f64),
    Neumann,
}

impl Robin {
    pub fn finite(self) -> Result<f64> {
        match self {
            Robin::Coefficient(g) => Ok(g),
            Robin::Neumann => Err(Error::NeumannNotAllowed),
        }
    }

    pub fn is_neumann(self) -> bool {
        matches!(self, Robin::Neumann)
    }
}

impl From<f64> for Robin {
    fn from(g: f64) -> Self {
        Robin::Coefficient(g)
    }
}

/// Physical and geometric constants of the problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    /// Diffusivity D₀ (length²/time).
    pub d0: f64,
    /// Conductivity / advection speed K₀ (length/time).
    pub k0: f64,
    /// Interval length L.
    pub length: f64,
    /// Robin coefficient at `x = 0`.
    pub alpha: Robin,
    /// Robin coefficient at `x = L`.
    pub beta: Robin,
}

impl ProblemParams {
    pub fn new(d0: f64, k0: f64, length: f64, alpha: impl Into<Robin>, beta: impl Into<Robin>) -> Result<Self> {
        let p = ProblemParams { d0, k0, length, alpha: alpha.into(), beta: beta.into() };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d0 > 0.0 && self.d0.is_finite()) {
            return Err(Error::InvalidParams(format!("D0 must be positive, got {}", self.d0)));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::InvalidParams(format!("L must be positive, got {}", self.length)));
        }
        if !(self.k0 >= 0.0 && self.k0.is_finite()) {
            return Err(Error::InvalidParams(format!("K0 must be nonnegative, got {}", self.k0)));
        }
        for (name, r) in [("alpha", self.alpha), ("beta", self.beta)] {
            if let Robin::Coefficient(g) = r {
                if !(g >= 0.0 && g.is_finite()) {
                    return Err(Error::InvalidParams(format!("{name} must be finite and nonnegative, got {g}")));
                }
            }
        }
        Ok(())
    }

    /// Shift `K₀/(2D₀)` of the spectral variable, `μ = λ + iκ`.
    #[inline]
    pub fn kappa(&self) -> f64 {
        self.k0 / (2.0 * self.d0)
    }

    pub fn with_robin(self, alpha: impl Into<Robin>, beta: impl Into<Robin>) -> Self {
        ProblemParams { alpha: alpha.into(), beta: beta.into(), ..self }
    }
}
