//! Unified-transform solver for the advection-diffusion equation
//!
//! ```text
//! θ_t + K₀ θ_x = D₀ θ_xx,   0 < x < L, t > 0
//! θ(x, 0) = θ₀(x)
//! θ(0, t) − α θ_x(0, t) = f(t)
//! θ(L, t) − β θ_x(L, t) = g(t)
//! ```
//!
//! The solution is evaluated from its integral representation: a Fourier term
//! along the real line plus a single contour integral over a deformed path in
//! the upper half of the spectral plane. On top of the direct solver sits a
//! boundary null-control synthesizer that finds a sine-series Dirichlet datum
//! at `x = L` steering the state to zero at a prescribed final time.
//!
//! The crate is `no_std` (it needs `alloc`); IO, configuration and the
//! command-line front end live in the `advdiff` companion crate.
//!
//! # Layout
//!
//! - [`spectral`]: dispersion relation, symmetry map, determinants, kernels
//!   and the root analysis of the determinant.
//! - [`transforms`]: Fourier transforms of initial data and t-transforms of
//!   boundary signals, including the sine control basis.
//! - [`contour`]: deformed integration paths and their quadrature.
//! - [`direct`]: evaluation of θ(x, t) for the four boundary-condition cases
//!   and the two infiltration scenarios.
//! - [`control`]: collocation system, exact and discrepancy-constrained
//!   solves, control reconstruction and closed-loop verification.
//! - [`dd`], [`extended`]: double-double arithmetic and the collocation
//!   system assembled and solved in it, for long horizons where `κ(A)`
//!   exceeds what `f64` can resolve.

#![no_std]
// `!(x > 0.0)` is used on purpose so NaN lands in the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod contour;
pub mod control;
pub mod dd;
pub mod direct;
mod error;
pub mod extended;
pub mod linalg;
pub mod math;
pub mod params;
pub mod quad;
pub mod spectral;
pub mod transforms;

pub use error::Error;
pub use math::C64;
pub use params::{ProblemParams, Robin};

pub type Result<T> = core::result::Result<T, Error>;
