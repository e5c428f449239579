//! Truncated Fourier fields on the periodic domain (−π, π).
//!
//! A [`SpectralField`] stores the coefficients `w_n` of `Σ w_n e^{inx}` for
//! every mode `|n| ≤ N` in a dense symmetric layout. Realness and zero mean
//! are tracked as flags rather than encoded in the storage.

use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use rustfft::FftDirection;

use crate::error::{Error, Result};
use crate::fft;
use crate::scalar::{cis, Cx, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField<T: Real> {
    coeffs: Vec<Cx<T>>,
    truncation: usize,
    real: bool,
    zero_mean: bool,
}

/// Size of the padded physical grid used for alias-free products: the
/// smallest power of two that is at least `4N + 2`.
pub fn grid_size(truncation: usize) -> usize {
    (4 * truncation + 2).next_power_of_two()
}

impl<T: Real> SpectralField<T> {
    pub fn zeros(truncation: usize) -> Self {
        Self {
            coeffs: vec![Cx::zero(); 2 * truncation + 1],
            truncation,
            real: true,
            zero_mean: true,
        }
    }

    /// The basis function `e_n = e^{inx}`.
    pub fn unit(truncation: usize, mode: i64) -> Self {
        let mut f = Self::zeros(truncation);
        let i = f.index(mode).expect("mode within truncation");
        f.coeffs[i] = Cx::one();
        f.real = mode == 0;
        f.zero_mean = mode != 0;
        f
    }

    /// Builds a field from `2N + 1` coefficients ordered from mode `−N` to `N`.
    /// Flags are inferred exactly from the data.
    pub fn from_coeffs(truncation: usize, coeffs: Vec<Cx<T>>) -> Result<Self> {
        if coeffs.len() != 2 * truncation + 1 {
            return Err(Error::TruncationMismatch {
                left: coeffs.len(),
                right: 2 * truncation + 1,
            });
        }
        let mut f = Self {
            coeffs,
            truncation,
            real: false,
            zero_mean: false,
        };
        f.refresh_flags();
        Ok(f)
    }

    pub fn from_fn(truncation: usize, mut f: impl FnMut(i64) -> Cx<T>) -> Self {
        let n = truncation as i64;
        let coeffs = (-n..=n).map(&mut f).collect();
        Self::from_coeffs(truncation, coeffs).expect("length matches by construction")
    }

    /// Real field from its mean and positive-mode coefficients `w_1..w_N`;
    /// negative modes are filled with exact conjugates.
    pub fn real_from_positive(mean: T, positive: &[Cx<T>]) -> Self {
        let truncation = positive.len();
        let mut f = Self::zeros(truncation);
        f.coeffs[truncation] = Cx::new(mean, T::zero());
        for (k, &c) in positive.iter().enumerate() {
            let n = k + 1;
            f.coeffs[truncation + n] = c;
            f.coeffs[truncation - n] = c.conj();
        }
        f.real = true;
        f.zero_mean = mean == T::zero();
        f
    }

    #[inline]
    pub fn truncation(&self) -> usize {
        self.truncation
    }

    #[inline]
    pub fn coeffs(&self) -> &[Cx<T>] {
        &self.coeffs
    }

    #[inline]
    pub fn is_real(&self) -> bool {
        self.real
    }

    #[inline]
    pub fn is_zero_mean(&self) -> bool {
        self.zero_mean
    }

    #[inline]
    fn index(&self, mode: i64) -> Option<usize> {
        let n = self.truncation as i64;
        (mode.abs() <= n).then(|| (mode + n) as usize)
    }

    /// Coefficient of mode `n`, zero outside the truncation.
    #[inline]
    pub fn get(&self, mode: i64) -> Cx<T> {
        self.index(mode).map_or(Cx::zero(), |i| self.coeffs[i])
    }

    /// `(n, w_n)` pairs from `−N` to `N`.
    pub fn modes(&self) -> impl Iterator<Item = (i64, Cx<T>)> + '_ {
        let n = self.truncation as i64;
        self.coeffs.iter().enumerate().map(move |(i, &c)| (i as i64 - n, c))
    }

    /// Returns a copy with mode `n` replaced. Flags are recomputed exactly.
    pub fn with_mode(&self, mode: i64, value: Cx<T>) -> Self {
        let mut f = self.clone();
        let i = f.index(mode).expect("mode within truncation");
        f.coeffs[i] = value;
        f.refresh_flags();
        f
    }

    fn refresh_flags(&mut self) {
        let n = self.truncation as i64;
        self.zero_mean = self.get(0) == Cx::zero();
        self.real = (0..=n).all(|k| self.get(-k) == self.get(k).conj());
    }

    /// Mode-wise map; flags are recomputed exactly from the result.
    pub fn map_modes(&self, mut f: impl FnMut(i64, Cx<T>) -> Cx<T>) -> Self {
        let n = self.truncation as i64;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| f(i as i64 - n, c))
            .collect();
        Self::from_coeffs(self.truncation, coeffs).expect("length preserved")
    }

    /// Same as [`map_modes`](Self::map_modes) but carries the given flags
    /// instead of recomputing them; used where the caller knows them analytically.
    pub(crate) fn map_modes_with_flags(
        &self,
        real: bool,
        zero_mean: bool,
        mut f: impl FnMut(i64, Cx<T>) -> Cx<T>,
    ) -> Self {
        let n = self.truncation as i64;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| f(i as i64 - n, c))
            .collect();
        Self {
            coeffs,
            truncation: self.truncation,
            real,
            zero_mean,
        }
    }

    /// Checks the flag invariants up to `tol`.
    pub fn flags_consistent(&self, tol: T) -> bool {
        let n = self.truncation as i64;
        let real_ok = !self.real || (0..=n).all(|k| (self.get(-k) - self.get(k).conj()).norm() <= tol);
        let mean_ok = !self.zero_mean || self.get(0).norm() <= tol;
        real_ok && mean_ok
    }

    /// Re-imposes `w_{−n} = conj(w_n)` from the nonnegative modes and marks the field real.
    pub fn symmetrized(&self) -> Self {
        let n = self.truncation as i64;
        let mut f = self.clone();
        let i0 = self.truncation;
        f.coeffs[i0] = Cx::new(self.coeffs[i0].re, T::zero());
        for k in 1..=n {
            let c = self.get(k);
            f.coeffs[(n + k) as usize] = c;
            f.coeffs[(n - k) as usize] = c.conj();
        }
        f.real = true;
        f.zero_mean = f.coeffs[i0] == Cx::zero();
        f
    }

    /// Copy with `w_0` forced to zero.
    pub fn without_mean(&self) -> Self {
        let mut f = self.clone();
        f.coeffs[self.truncation] = Cx::zero();
        f.zero_mean = true;
        f
    }

    /// Zero-pads or truncates to a new `N`.
    pub fn resized(&self, truncation: usize) -> Self {
        let mut f = Self::from_fn(truncation, |n| self.get(n));
        if truncation >= self.truncation {
            f.real = self.real;
            f.zero_mean = self.zero_mean;
        }
        f
    }

    /// Keeps only the modes `|n| ≤ keep`, zeroing the rest (same storage size).
    pub fn low_pass(&self, keep: usize) -> Self {
        let k = keep as i64;
        self.map_modes_with_flags(self.real, self.zero_mean, |n, c| {
            if n.abs() <= k {
                c
            } else {
                Cx::zero()
            }
        })
    }

    pub fn scale(&self, factor: Cx<T>) -> Self {
        let real = self.real && factor.im == T::zero();
        self.map_modes_with_flags(real, self.zero_mean, |_, c| c * factor)
    }

    pub fn scale_real(&self, factor: T) -> Self {
        self.map_modes_with_flags(self.real, self.zero_mean, |_, c| c * factor)
    }

    /// Coefficients of the pointwise complex conjugate `conj(w(x))`, i.e. `conj(w_{−n})`.
    pub fn conj(&self) -> Self {
        self.map_modes_with_flags(self.real, self.zero_mean, |n, _| self.get(-n).conj())
    }

    /// Translation `w(x) ↦ w(x − shift)`.
    pub fn translated(&self, shift: T) -> Self {
        self.map_modes_with_flags(self.real, self.zero_mean, |n, c| c * cis(-T::from_int(n) * shift))
    }

    /// `‖w‖_{H^s} = sqrt(Σ (n² + 1)^s |w_n|²)`.
    pub fn hs_norm(&self, s: T) -> T {
        self.modes()
            .map(|(n, c)| {
                let weight = (T::from_int(n * n) + T::one()).powf(s);
                weight * c.norm_sqr()
            })
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }

    /// `‖w‖²_H = Σ |w_n|²`.
    pub fn norm_sq(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |a, c| a + c.norm_sqr())
    }

    pub fn h_norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn h1_norm(&self) -> T {
        self.hs_norm(T::one())
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |a, c| a.max(c.norm()))
    }

    /// Bilinear pairing `[v, w] = Σ v_n w_{−n}`; the shorter field is zero-padded.
    pub fn pairing(&self, other: &Self) -> Cx<T> {
        let n = self.truncation.min(other.truncation) as i64;
        (-n..=n).fold(Cx::zero(), |acc, k| acc + self.get(k) * other.get(-k))
    }

    /// `(v, w)_H = Σ v_n conj(w_n)`.
    pub fn inner_product(&self, other: &Self) -> Cx<T> {
        let n = self.truncation.min(other.truncation) as i64;
        (-n..=n).fold(Cx::zero(), |acc, k| acc + self.get(k) * other.get(k).conj())
    }

    /// `∂_x^order`: mode `n` is multiplied by `(in)^order`.
    pub fn derivative(&self, order: u32) -> Self {
        let zero_mean = self.zero_mean || order > 0;
        self.map_modes_with_flags(self.real, zero_mean, |n, c| c * ik_pow::<T>(n, order))
    }

    /// Point values `w(x_j)`, `x_j = −π + 2πj/M`, on an `M`-point grid, `M > 2N`.
    pub fn to_grid(&self, m: usize) -> Vec<Cx<T>> {
        assert!(m > 2 * self.truncation, "grid too small for truncation");
        let mut buf = self.scatter(m);
        fft::plan::<T>(m, FftDirection::Inverse).process(&mut buf);
        buf
    }

    /// Coefficients placed in FFT order on an `M`-point grid, pre-shifted so
    /// that the inverse transform samples at `x_j = −π + 2πj/M`.
    fn scatter(&self, m: usize) -> Vec<Cx<T>> {
        let mut buf = vec![Cx::zero(); m];
        for (n, c) in self.modes() {
            let slot = n.rem_euclid(m as i64) as usize;
            buf[slot] = if n % 2 == 0 { c } else { -c };
        }
        buf
    }

    /// Inverse of [`to_grid`](Self::to_grid): projects grid values onto `|n| ≤ truncation`.
    pub fn from_grid(values: &[Cx<T>], truncation: usize) -> Self {
        let m = values.len();
        assert!(m > 2 * truncation, "grid too small for truncation");
        let mut buf = values.to_vec();
        fft::plan::<T>(m, FftDirection::Forward).process(&mut buf);
        let inv_m = T::one() / T::from_count(m);
        Self::from_fn(truncation, |n| {
            let c = buf[n.rem_euclid(m as i64) as usize] * inv_m;
            if n % 2 == 0 {
                c
            } else {
                -c
            }
        })
    }

    /// Mean of `|w(x)|²` over the padded grid.
    pub fn grid_mean_square(&self) -> T {
        let m = grid_size(self.truncation);
        let values = self.to_grid(m);
        values.iter().fold(T::zero(), |a, v| a + v.norm_sqr()) / T::from_count(m)
    }
}

/// `(in)^order` as a complex number.
pub(crate) fn ik_pow<T: Real>(n: i64, order: u32) -> Cx<T> {
    let magnitude = T::from_int(n).powi(order as i32);
    match order % 4 {
        0 => Cx::new(magnitude, T::zero()),
        1 => Cx::new(T::zero(), magnitude),
        2 => Cx::new(-magnitude, T::zero()),
        _ => Cx::new(T::zero(), -magnitude),
    }
}

/// Alias-free truncated product of two or three fields.
///
/// Each factor is evaluated on the padded grid (conjugated pointwise where
/// `conjugate[i]` is set), the values are multiplied, and the result is
/// projected back onto `|n| ≤ N`.
pub fn dealiased_product<T: Real>(
    fields: &[&SpectralField<T>],
    conjugate: &[bool],
) -> Result<SpectralField<T>> {
    if !(2..=3).contains(&fields.len()) {
        return Err(Error::FactorCount(fields.len()));
    }
    if conjugate.len() != fields.len() {
        return Err(Error::GridMismatch);
    }
    let truncation = fields[0].truncation;
    if let Some(f) = fields.iter().find(|f| f.truncation != truncation) {
        return Err(Error::TruncationMismatch {
            left: truncation,
            right: f.truncation,
        });
    }
    let m = grid_size(truncation);
    let inverse = fft::plan::<T>(m, FftDirection::Inverse);
    let mut product = vec![Cx::one(); m];
    for (field, &conj) in fields.iter().zip(conjugate) {
        let mut buf = field.scatter(m);
        inverse.process(&mut buf);
        for (p, v) in product.iter_mut().zip(&buf) {
            *p *= if conj { v.conj() } else { *v };
        }
    }
    let out = SpectralField::from_grid(&product, truncation);
    if fields.iter().all(|f| f.real) {
        return Ok(out.symmetrized());
    }
    Ok(out)
}

impl<T: Real> Add for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn add(self, rhs: Self) -> SpectralField<T> {
        assert_eq!(self.truncation, rhs.truncation, "truncation mismatch");
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect();
        SpectralField {
            coeffs,
            truncation: self.truncation,
            real: self.real && rhs.real,
            zero_mean: self.zero_mean && rhs.zero_mean,
        }
    }
}

impl<T: Real> Sub for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn sub(self, rhs: Self) -> SpectralField<T> {
        assert_eq!(self.truncation, rhs.truncation, "truncation mismatch");
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect();
        SpectralField {
            coeffs,
            truncation: self.truncation,
            real: self.real && rhs.real,
            zero_mean: self.zero_mean && rhs.zero_mean,
        }
    }
}

impl<T: Real> Add for SpectralField<T> {
    type Output = SpectralField<T>;
    fn add(self, rhs: Self) -> SpectralField<T> {
        &self + &rhs
    }
}

impl<T: Real> Sub for SpectralField<T> {
    type Output = SpectralField<T>;
    fn sub(self, rhs: Self) -> SpectralField<T> {
        &self - &rhs
    }
}

impl<T: Real> Neg for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn neg(self) -> SpectralField<T> {
        self.scale_real(-T::one())
    }
}

impl<T: Real> Mul<Cx<T>> for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn mul(self, rhs: Cx<T>) -> SpectralField<T> {
        self.scale(rhs)
    }
}

impl<T: Real> Mul<T> for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn mul(self, rhs: T) -> SpectralField<T> {
        self.scale_real(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_field;
    use approx::assert_relative_eq;

    type F = SpectralField<f64>;

    fn c(re: f64, im: f64) -> Cx<f64> {
        Cx::new(re, im)
    }

    #[test]
    fn hs_norm_of_unit_modes() {
        let e1 = F::unit(4, 1);
        assert_relative_eq!(e1.hs_norm(0.0), 1.0);
        assert_relative_eq!(e1.hs_norm(1.0), 2f64.sqrt());
        let sum = &e1 + &F::unit(4, 2);
        assert_relative_eq!(sum.hs_norm(1.0), 7f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn pairing_examples() {
        let e1 = F::unit(3, 1);
        let em1 = F::unit(3, -1);
        assert_eq!(e1.pairing(&em1), c(1.0, 0.0));
        assert_eq!(e1.pairing(&e1), c(0.0, 0.0));
        let w = &(&F::unit(3, 0) + &e1) + &em1;
        // oracle: Σ_n w_n w_{-n} over n ∈ {-1, 0, 1}
        let oracle: Cx<f64> = (-1..=1).map(|n| w.get(n) * w.get(-n)).sum();
        assert_eq!(oracle, c(3.0, 0.0));
        assert_eq!(w.pairing(&w), oracle);
    }

    #[test]
    fn pairing_pads_the_shorter_field() {
        let a = F::unit(2, 1);
        let b = F::unit(5, -1);
        assert_eq!(a.pairing(&b), c(1.0, 0.0));
        assert_eq!(b.pairing(&a), c(1.0, 0.0));
    }

    #[test]
    fn inner_product_examples() {
        let e1 = F::unit(3, 1);
        assert_eq!(e1.inner_product(&e1), c(1.0, 0.0));
        assert_eq!(e1.inner_product(&F::unit(3, 2)), c(0.0, 0.0));
        let a = F::unit(3, 0).scale_real(2.0);
        let b = F::unit(3, 0).scale(c(0.0, 1.0));
        assert_eq!(a.inner_product(&b), c(0.0, -2.0));
    }

    #[test]
    fn inner_product_is_pairing_with_conjugate() {
        let mut rng = crate::random::rng(3);
        for _ in 0..20 {
            let v = random_field::<f64>(&mut rng, 6);
            let w = random_field::<f64>(&mut rng, 6);
            assert_eq!(v.inner_product(&w), v.pairing(&w.conj()));
            assert_relative_eq!(w.inner_product(&w).re, w.norm_sq(), max_relative = 1e-14);
        }
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(F::unit(3, 1).derivative(1), F::unit(3, 1).scale(c(0.0, 1.0)));
        assert_eq!(F::unit(3, 2).derivative(2), F::unit(3, 2).scale_real(-4.0));
        let two_cos = F::real_from_positive(0.0, &[c(1.0, 0.0), c(0.0, 0.0)]);
        let d = two_cos.derivative(1);
        assert!(d.is_real());
        assert_eq!(d.get(1), c(0.0, 1.0));
        assert_eq!(d.get(-1), c(0.0, -1.0));
    }

    #[test]
    fn product_examples() {
        let e1 = F::unit(3, 1);
        let sq = dealiased_product(&[&e1, &e1], &[false, false]).unwrap();
        assert!((&sq - &F::unit(3, 2)).max_abs() < 1e-15);
        let en = F::unit(3, 3);
        let p = dealiased_product(&[&en, &en], &[false, false]).unwrap();
        assert!(p.max_abs() < 1e-15);
        let k = c(0.7, -1.3);
        let u = F::unit(3, 0).scale(k);
        let cube = dealiased_product(&[&u, &u, &u], &[false, false, true]).unwrap();
        let expected = k * k.norm_sqr();
        assert!((cube.get(0) - expected).norm() < 1e-14);
        assert!((&cube - &u.scale(c(k.norm_sqr(), 0.0))).max_abs() < 1e-14);
    }

    #[test]
    fn product_rejects_bad_inputs() {
        let a = F::unit(3, 1);
        let b = F::unit(4, 1);
        assert!(matches!(
            dealiased_product(&[&a, &b], &[false, false]),
            Err(Error::TruncationMismatch { .. })
        ));
        assert!(matches!(dealiased_product(&[&a], &[false]), Err(Error::FactorCount(1))));
        assert!(dealiased_product(&[&a, &a], &[false]).is_err());
    }

    fn convolution_oracle(fields: &[&F], conjugate: &[bool]) -> F {
        // direct O(N^p) convolution; conj(w(x)) has coefficients conj(w_{-n})
        let n = fields[0].truncation() as i64;
        let factor = |i: usize, k: i64| {
            if conjugate[i] {
                fields[i].get(-k).conj()
            } else {
                fields[i].get(k)
            }
        };
        F::from_fn(n as usize, |p| {
            let mut acc = c(0.0, 0.0);
            for a in -n..=n {
                if fields.len() == 2 {
                    acc += factor(0, a) * factor(1, p - a);
                } else {
                    for b in -n..=n {
                        acc += factor(0, a) * factor(1, b) * factor(2, p - a - b);
                    }
                }
            }
            acc
        })
    }

    #[test]
    fn product_matches_direct_convolution() {
        let mut rng = crate::random::rng(11);
        for n in 1..=8 {
            let u = random_field::<f64>(&mut rng, n);
            let v = random_field::<f64>(&mut rng, n);
            let w = random_field::<f64>(&mut rng, n);
            for mask in [[false, false, true], [true, false, false], [false, false, false]] {
                let fast = dealiased_product(&[&u, &v, &w], &mask).unwrap();
                let slow = convolution_oracle(&[&u, &v, &w], &mask);
                let scale = 1.0 + slow.h_norm();
                assert!((&fast - &slow).h_norm() <= 1e-12 * scale, "cubic N={n}");
            }
            let fast = dealiased_product(&[&u, &v], &[false, true]).unwrap();
            let slow = convolution_oracle(&[&u, &v], &[false, true]);
            assert!((&fast - &slow).h_norm() <= 1e-12 * (1.0 + slow.h_norm()), "quadratic N={n}");
        }
    }

    #[test]
    fn parseval_on_padded_grid() {
        let mut rng = crate::random::rng(5);
        for n in [1, 4, 16, 33] {
            let w = random_field::<f64>(&mut rng, n);
            assert_relative_eq!(w.grid_mean_square(), w.norm_sq(), max_relative = 1e-12);
        }
    }

    #[test]
    fn grid_round_trip_and_sample_points() {
        // w = e_1 sampled at x_0 = −π gives e^{−iπ} = −1
        let e1 = F::unit(2, 1);
        let g = e1.to_grid(8);
        assert!((g[0] - c(-1.0, 0.0)).norm() < 1e-15);
        let back = F::from_grid(&g, 2);
        assert!((&back - &e1).max_abs() < 1e-15);
    }

    #[test]
    fn derivative_commutes_with_product_when_untruncated() {
        // (u v)' = u' v + u v' holds on modes where the product is not truncated
        let mut rng = crate::random::rng(9);
        let u = random_field::<f64>(&mut rng, 3).resized(8);
        let v = random_field::<f64>(&mut rng, 3).resized(8);
        let uv = dealiased_product(&[&u, &v], &[false, false]).unwrap();
        let lhs = uv.derivative(1);
        let rhs = &dealiased_product(&[&u.derivative(1), &v], &[false, false]).unwrap()
            + &dealiased_product(&[&u, &v.derivative(1)], &[false, false]).unwrap();
        assert!((&lhs - &rhs).h_norm() < 1e-12);
    }

    #[test]
    fn flags_follow_construction() {
        let r = F::real_from_positive(0.0, &[c(0.3, 0.1), c(-0.2, 0.5)]);
        assert!(r.is_real() && r.is_zero_mean());
        assert!(r.flags_consistent(0.0));
        let z = F::unit(2, 1);
        assert!(!z.is_real() && z.is_zero_mean());
        assert!(F::unit(2, 0).is_real());
        let shifted = r.translated(0.37);
        assert!(shifted.is_real() && shifted.flags_consistent(1e-15));
    }
}
