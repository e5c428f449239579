//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display, LowerExp};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::FftNum;

/// Real floating point type the spectral machinery is generic over (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FftNum
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Low word of the double-word representation of 2π in this precision.
    fn tau_lo() -> Self;

    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("literal representable")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("count representable")
    }

    #[inline]
    fn from_int(n: i64) -> Self {
        <Self as FromPrimitive>::from_i64(n).expect("integer representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).expect("finite conversion")
    }
}

impl Real for f64 {
    fn tau_lo() -> Self {
        2.449_293_598_294_706_4e-16
    }
}

impl Real for f32 {
    fn tau_lo() -> Self {
        // 2π - (2π as f32), evaluated in f64.
        let hi = std::f32::consts::TAU as f64;
        (std::f64::consts::TAU - hi + 2.449_293_598_294_706_4e-16) as f32
    }
}

/// Complex scalar over [`Real`].
pub type Cx<T> = Complex<T>;

/// Unit-modulus complex number `exp(i θ)`.
#[inline]
pub(crate) fn cis<T: Real>(theta: T) -> Cx<T> {
    let (s, c) = theta.sin_cos();
    Complex::new(c, s)
}
