//! Experiments and finite-dimensional theory built on the simulation layer.

pub mod fit;
pub mod lyapunov;
pub mod equilibria;
pub mod exponent;
pub mod wave;
pub mod attractor;
pub mod gradient;
pub mod hd;
pub mod rate;
