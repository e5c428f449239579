//! Lyapunov functional of the reduced GL2 system.

use crate::scalar::Real;
use crate::spectral::SpectralField;

/// `‖v‖²_{H¹} + ‖v‖⁴ − ½Σ|v_n|⁴ − (α + 1)‖v‖²`.
pub fn lyapunov_value<T: Real>(v: &SpectralField<T>, alpha: T) -> T {
    let h1_sq = v.h1_norm().powi(2);
    let norm_sq = v.norm_sq();
    let quartic = v.coeffs().iter().map(|c| c.norm_sqr().powi(2)).fold(T::zero(), |a, b| a + b);
    h1_sq + norm_sq * norm_sq - T::lit(0.5) * quartic - (alpha + T::one()) * norm_sq
}

/// `dL/dt = −2Σ|v̇_n|²` along the reduced flow, evaluated from the right-hand side.
pub fn lyapunov_rate<T: Real>(v: &SpectralField<T>, alpha: T) -> T {
    -T::lit(2.0) * crate::models::rhs_reduced_gl2(alpha, v).norm_sq()
}
