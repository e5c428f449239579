//! Pseudospectral laboratory for periodic Ginzburg–Landau and
//! Kuramoto–Sivashinsky equations with large dispersion, their rotating-frame
//! and time-averaged forms, and the finite-dimensional reductions that arise
//! in the large-dispersion limit.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`, which is what the experiments use.

pub mod analysis;
pub mod error;
mod fft;
pub mod groups;
pub mod models;
pub mod nonlinear;
pub mod random;
pub mod scalar;
pub mod spectral;
pub mod timestep;

pub use error::{Error, Result};
pub use groups::GroupKind;
pub use nonlinear::OscillatoryKind;
pub use scalar::{Cx, Real};
pub use spectral::SpectralField;

/// Double-precision spectral field.
pub type Field = SpectralField<f64>;
/// Single-precision spectral field.
pub type Field32 = SpectralField<f32>;
/// Double-precision complex scalar.
pub type Complex64 = Cx<f64>;
