//! Seeded random fields.
//!
//! Modes are independent complex Gaussians with variance `(1 + n²)^{-2}`,
//! which gives smooth fields whose spectrum decays like `n^{-2}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::scalar::{Cx, Real};
use crate::spectral::SpectralField;

pub type FieldRng = ChaCha8Rng;

pub fn rng(seed: u64) -> FieldRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut impl Rng, std_dev: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    z * std_dev
}

fn mode_std(n: i64) -> f64 {
    1.0 / (1.0 + (n * n) as f64)
}

/// Complex field with independent Gaussian modes.
pub fn random_field<T: Real>(rng: &mut impl Rng, truncation: usize) -> SpectralField<T> {
    SpectralField::from_fn(truncation, |n| {
        let s = mode_std(n) / std::f64::consts::SQRT_2;
        Cx::new(T::lit(gaussian(rng, s)), T::lit(gaussian(rng, s)))
    })
}

/// Real zero-mean field with the same spectral envelope.
pub fn random_real_field<T: Real>(rng: &mut impl Rng, truncation: usize) -> SpectralField<T> {
    let positive: Vec<Cx<T>> = (1..=truncation as i64)
        .map(|n| {
            let s = mode_std(n) / std::f64::consts::SQRT_2;
            Cx::new(T::lit(gaussian(rng, s)), T::lit(gaussian(rng, s)))
        })
        .collect();
    SpectralField::real_from_positive(T::zero(), &positive)
}

/// Rescales a nonzero field to the requested H-norm.
pub fn with_h_norm<T: Real>(field: &SpectralField<T>, norm: T) -> SpectralField<T> {
    let current = field.h_norm();
    if current == T::zero() {
        return field.clone();
    }
    field.scale_real(norm / current)
}

/// Uniform sample in `[lo, hi)`.
pub fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}
