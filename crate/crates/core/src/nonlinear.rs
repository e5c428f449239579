//! Nonlinear terms, their fast-oscillating rotating-frame versions, and the
//! closed-form time averages.
//!
//! For the Airy group `H₁(τ)` and the Schrödinger group `F₁(τ)`:
//!
//! * `F(τ, w) = H₁(−τ)(u|u|²)`, `u = H₁(τ)w`, averages to [`averaged_n`];
//! * `G(τ, w) = F₁(−τ)(u|u|²)`, `u = F₁(τ)w`, averages to [`averaged_m`];
//! * `H̃(τ, w) = H₁(−τ)(u ∂ₓu)`, `u = H₁(τ)w`, averages to [`averaged_k`].
//!
//! [`quadrature_average`] computes the same averages by brute-force
//! trapezoid sums over one period and is kept independent of the closed forms.

use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::groups::{apply_group, GroupKind};
use crate::scalar::{Cx, Real};
use crate::spectral::{dealiased_product, SpectralField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OscillatoryKind {
    CubicAiry,
    CubicSchrodinger,
    BurgersAiry,
}

impl OscillatoryKind {
    pub fn group(self) -> GroupKind {
        match self {
            OscillatoryKind::CubicAiry | OscillatoryKind::BurgersAiry => GroupKind::Airy,
            OscillatoryKind::CubicSchrodinger => GroupKind::Schrodinger,
        }
    }

    /// Number of trapezoid points above which the average over one period is
    /// exact for fields truncated at `N`.
    pub fn exact_quadrature_points(self, truncation: usize) -> usize {
        let m = 3 * truncation;
        match self.group() {
            GroupKind::Airy => 2 * m * m * m,
            GroupKind::Schrodinger => 2 * m * m,
        }
    }
}

/// Alias-free `u|u|²`.
pub fn gl_cubic<T: Real>(u: &SpectralField<T>) -> SpectralField<T> {
    dealiased_product(&[u, u, u], &[false, false, true]).expect("factors share a truncation")
}

/// Alias-free `u ∂ₓu`. For real `u` the mean is exactly zero, since the term is `∂ₓ(u²/2)`.
pub fn burgers_term<T: Real>(u: &SpectralField<T>) -> SpectralField<T> {
    let du = u.derivative(1);
    let out = dealiased_product(&[u, &du], &[false, false]).expect("factors share a truncation");
    if u.is_real() {
        out.without_mean()
    } else {
        out
    }
}

/// The plain (τ = 0) nonlinearity for a kind.
pub fn plain_nonlinearity<T: Real>(kind: OscillatoryKind, w: &SpectralField<T>) -> SpectralField<T> {
    match kind {
        OscillatoryKind::CubicAiry | OscillatoryKind::CubicSchrodinger => gl_cubic(w),
        OscillatoryKind::BurgersAiry => burgers_term(w),
    }
}

/// `G₁(−τ) ∘ nonlinearity ∘ G₁(τ)` for the group attached to `kind`.
pub fn oscillatory_eval<T: Real>(kind: OscillatoryKind, tau: T, w: &SpectralField<T>) -> SpectralField<T> {
    let group = kind.group();
    let u = apply_group(group, T::one(), tau, w);
    let value = plain_nonlinearity(kind, &u);
    apply_group(group, T::one(), -tau, &value)
}

/// Closed-form average of `F`, mode by mode:
/// `N(w)_0 = 2w₀(‖w‖² − |w₀|²) + w̄₀[w,w]`,
/// `N(w)_n = w_n(2‖w‖² − |w_n|² − 2|w_{−n}|²) + w̄_{−n}[w,w]` for `n ≠ 0`.
pub fn averaged_n<T: Real>(w: &SpectralField<T>) -> SpectralField<T> {
    let norm_sq = w.norm_sq();
    let pair = w.pairing(w);
    let two = T::lit(2.0);
    w.map_modes(|n, wn| {
        if n == 0 {
            wn * (two * (norm_sq - wn.norm_sqr())) + wn.conj() * pair
        } else {
            let wm = w.get(-n);
            wn * (two * norm_sq - wn.norm_sqr() - two * wm.norm_sqr()) + wm.conj() * pair
        }
    })
}

/// Unseparated form `N(w) = 2w‖w‖² + w̄[w,w] − 2w₀|w₀|²e₀ − Σ_{n≠0} w_n(|w_n|² + 2|w_{−n}|²)e_n`,
/// where `w̄` is the pointwise conjugate with coefficients `conj(w_{−n})`.
pub fn averaged_n_unseparated<T: Real>(w: &SpectralField<T>) -> SpectralField<T> {
    let norm_sq = w.norm_sq();
    let pair = w.pairing(w);
    let two = T::lit(2.0);
    let first = w.scale_real(two * norm_sq);
    let second = w.conj().scale(pair);
    let correction = w.map_modes(|n, wn| {
        if n == 0 {
            wn * (two * wn.norm_sqr())
        } else {
            wn * (wn.norm_sqr() + two * w.get(-n).norm_sqr())
        }
    });
    &(&first + &second) - &correction
}

/// `M(w)_n = w_n(2‖w‖² − |w_n|²)`.
pub fn averaged_m<T: Real>(w: &SpectralField<T>) -> SpectralField<T> {
    let two_norm_sq = T::lit(2.0) * w.norm_sq();
    w.map_modes_with_flags(w.is_real(), w.is_zero_mean(), |_, wn| wn * (two_norm_sq - wn.norm_sqr()))
}

/// `K(w) = w₀ ∂ₓw + (Σ_n i n w_n w_{−n}) e₀`.
pub fn averaged_k<T: Real>(w: &SpectralField<T>) -> SpectralField<T> {
    let w0 = w.get(0);
    let resonant = w
        .modes()
        .fold(Cx::zero(), |acc: Cx<T>, (n, wn)| acc + Cx::new(T::zero(), T::from_int(n)) * wn * w.get(-n));
    let transport = w.derivative(1).scale(w0);
    transport.with_mode(0, resonant)
}

/// Neumaier-compensated accumulator for a sequence of fields.
struct CompensatedSum<T: Real> {
    sum: Vec<Cx<T>>,
    carry: Vec<Cx<T>>,
}

impl<T: Real> CompensatedSum<T> {
    fn new(len: usize) -> Self {
        Self {
            sum: vec![Cx::zero(); len],
            carry: vec![Cx::zero(); len],
        }
    }

    fn add_scalar(s: &mut T, c: &mut T, x: T) {
        let t = *s + x;
        if s.abs() >= x.abs() {
            *c += (*s - t) + x;
        } else {
            *c += (x - t) + *s;
        }
        *s = t;
    }

    fn push(&mut self, values: &[Cx<T>]) {
        for ((s, c), v) in self.sum.iter_mut().zip(self.carry.iter_mut()).zip(values) {
            Self::add_scalar(&mut s.re, &mut c.re, v.re);
            Self::add_scalar(&mut s.im, &mut c.im, v.im);
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.push(&other.sum);
        self.push(&other.carry);
        self
    }

    fn total(&self) -> Vec<Cx<T>> {
        self.sum.iter().zip(&self.carry).map(|(s, c)| s + c).collect()
    }
}

/// Period average `(1/P) Σ_j oscillatory_eval(kind, 2πj/P, w)`.
///
/// Fails unless `points` exceeds [`OscillatoryKind::exact_quadrature_points`],
/// the count at which the trapezoid rule integrates the trigonometric
/// polynomial in τ exactly.
pub fn quadrature_average<T: Real>(
    kind: OscillatoryKind,
    w: &SpectralField<T>,
    points: usize,
) -> Result<SpectralField<T>> {
    let required = kind.exact_quadrature_points(w.truncation());
    if points <= required {
        return Err(Error::InexactQuadrature {
            points,
            required: required + 1,
        });
    }
    let len = 2 * w.truncation() + 1;
    let step = T::TAU() / T::from_count(points);
    let chunk = 256;
    let total = (0..points.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut acc = CompensatedSum::new(len);
            for j in (c * chunk)..((c + 1) * chunk).min(points) {
                let value = oscillatory_eval(kind, step * T::from_count(j), w);
                acc.push(value.coeffs());
            }
            acc
        })
        .reduce(|| CompensatedSum::new(len), CompensatedSum::merge);
    let inv = T::one() / T::from_count(points);
    let coeffs = total.total().into_iter().map(|c| c * inv).collect();
    SpectralField::from_coeffs(w.truncation(), coeffs)
}

/// Smallest admissible point count for [`quadrature_average`].
pub fn minimal_quadrature_points(kind: OscillatoryKind, truncation: usize) -> usize {
    kind.exact_quadrature_points(truncation) + 1
}

/// Closed-form average matching `kind`.
pub fn closed_form_average<T: Real>(kind: OscillatoryKind, w: &SpectralField<T>) -> SpectralField<T> {
    match kind {
        OscillatoryKind::CubicAiry => averaged_n(w),
        OscillatoryKind::CubicSchrodinger => averaged_m(w),
        OscillatoryKind::BurgersAiry => averaged_k(w),
    }
}

/// Dissipativity pairing `(A(w), w)_H` together with `‖w‖⁴_H`.
pub fn dissipativity<T: Real>(averaged: &SpectralField<T>, w: &SpectralField<T>) -> (Cx<T>, T) {
    let n2 = w.norm_sq();
    (averaged.inner_product(w), n2 * n2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::apply_group;
    use crate::random::{random_field, random_real_field, rng, uniform};
    use crate::scalar::cis;

    type F = SpectralField<f64>;

    fn c(re: f64, im: f64) -> Cx<f64> {
        Cx::new(re, im)
    }

    fn oracle(kind: OscillatoryKind, w: &F) -> F {
        quadrature_average(kind, w, minimal_quadrature_points(kind, w.truncation())).unwrap()
    }

    #[test]
    fn gl_cubic_examples() {
        let k = c(0.4, 1.1);
        let u = F::unit(4, 0).scale(k);
        assert!((gl_cubic(&u).get(0) - k * k.norm_sqr()).norm() < 1e-15);
        let e1 = F::unit(4, 1);
        assert!((&gl_cubic(&e1) - &e1).max_abs() < 1e-15);
        // 8cos³x = 6cos x + 2cos 3x, i.e. 3(e_1 + e_{-1}) + (e_3 + e_{-3})
        let two_cos = F::real_from_positive(0.0, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let cube = gl_cubic(&two_cos);
        let expected = F::real_from_positive(0.0, &[c(3.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!((&cube - &expected).max_abs() < 1e-14);
        // truncated at N = 2 the 3x harmonic is dropped
        let cube2 = gl_cubic(&two_cos.resized(2));
        assert!((&cube2 - &expected.resized(2)).max_abs() < 1e-14);
        assert_eq!(cube2.get(2), c(0.0, 0.0));
    }

    #[test]
    fn burgers_examples() {
        let e1 = F::unit(3, 1);
        assert!((burgers_term(&e1).get(2) - c(0.0, 1.0)).norm() < 1e-15);
        // 2cos x · (−2 sin x) = −2 sin 2x = i e_2 − i e_{−2}
        let two_cos = F::real_from_positive(0.0, &[c(1.0, 0.0), c(0.0, 0.0)]);
        let b = burgers_term(&two_cos);
        assert!((b.get(2) - c(0.0, 1.0)).norm() < 1e-15);
        assert!((b.get(-2) - c(0.0, -1.0)).norm() < 1e-15);
        let mut r = rng(8);
        for _ in 0..10 {
            let u = random_real_field::<f64>(&mut r, 7).with_mode(0, c(0.3, 0.0));
            assert_eq!(burgers_term(&u).get(0), c(0.0, 0.0));
        }
    }

    #[test]
    fn oscillatory_eval_reduces_to_plain_at_zero() {
        let mut r = rng(12);
        let w = random_field::<f64>(&mut r, 5);
        for kind in [OscillatoryKind::CubicAiry, OscillatoryKind::CubicSchrodinger, OscillatoryKind::BurgersAiry] {
            assert!((&oscillatory_eval(kind, 0.0, &w) - &plain_nonlinearity(kind, &w)).max_abs() < 1e-15);
            let period = oscillatory_eval(kind, std::f64::consts::TAU, &w);
            assert!((&period - &plain_nonlinearity(kind, &w)).max_abs() < 1e-12);
        }
        let e1 = F::unit(5, 1);
        for tau in [0.3, 1.7, 100.0] {
            assert!((&oscillatory_eval(OscillatoryKind::CubicAiry, tau, &e1) - &e1).max_abs() < 1e-13);
        }
    }

    #[test]
    fn averaged_n_examples() {
        let k = c(-0.6, 0.9);
        let u = F::unit(3, 0).scale(k);
        assert!((averaged_n(&u).get(0) - k * k.norm_sqr()).norm() < 1e-15);
        let e1 = F::unit(3, 1);
        assert!((&averaged_n(&e1) - &e1).max_abs() < 1e-15);
        assert!((&oracle(OscillatoryKind::CubicAiry, &e1) - &e1).max_abs() < 1e-12);
        let w = &F::unit(3, 1) + &F::unit(3, -1);
        let expected = w.scale_real(3.0);
        assert!((&averaged_n(&w) - &expected).max_abs() < 1e-14);
        assert!((&oracle(OscillatoryKind::CubicAiry, &w) - &expected).max_abs() < 1e-11);
    }

    #[test]
    fn averaged_m_examples() {
        let e1 = F::unit(3, 1);
        assert!((&averaged_m(&e1) - &e1).max_abs() < 1e-15);
        assert!((&oracle(OscillatoryKind::CubicSchrodinger, &e1) - &e1).max_abs() < 1e-13);
        let w = &F::unit(3, 1) + &F::unit(3, 2);
        assert!((&averaged_m(&w) - &w.scale_real(3.0)).max_abs() < 1e-15);
        assert!((&oracle(OscillatoryKind::CubicSchrodinger, &w) - &w.scale_real(3.0)).max_abs() < 1e-12);
        let k = c(1.2, -0.1);
        let u = F::unit(3, 0).scale(k);
        assert!((averaged_m(&u).get(0) - k * k.norm_sqr()).norm() < 1e-15);
        let q = oracle(OscillatoryKind::CubicSchrodinger, &u);
        assert!((q.get(0) - k * k.norm_sqr()).norm() < 1e-14);
    }

    #[test]
    fn averaged_k_examples() {
        let mut r = rng(13);
        for _ in 0..10 {
            let w = random_real_field::<f64>(&mut r, 6);
            assert!(averaged_k(&w).max_abs() < 1e-15);
            assert!(oracle(OscillatoryKind::BurgersAiry, &w).h_norm() < 1e-12);
        }
        let w = &F::unit(3, 0) + &F::unit(3, 1);
        let expected = F::unit(3, 1).scale(c(0.0, 1.0));
        assert!((&averaged_k(&w) - &expected).max_abs() < 1e-15);
        assert!((&oracle(OscillatoryKind::BurgersAiry, &w) - &expected).max_abs() < 1e-12);
        let e1 = F::unit(3, 1);
        assert!(averaged_k(&e1).max_abs() < 1e-15);
        assert!(oracle(OscillatoryKind::BurgersAiry, &e1).max_abs() < 1e-12);
    }

    #[test]
    fn quadrature_rejects_too_few_points() {
        let w = F::unit(2, 1);
        let need = OscillatoryKind::CubicAiry.exact_quadrature_points(2);
        assert_eq!(need, 2 * 216);
        assert!(matches!(
            quadrature_average(OscillatoryKind::CubicAiry, &w, need),
            Err(Error::InexactQuadrature { .. })
        ));
        assert_eq!(OscillatoryKind::CubicSchrodinger.exact_quadrature_points(2), 72);
    }

    #[test]
    fn separated_and_unseparated_n_agree() {
        let mut r = rng(21);
        for n in 0..=8 {
            let w = random_field::<f64>(&mut r, n);
            let a = averaged_n(&w);
            let b = averaged_n_unseparated(&w);
            assert!((&a - &b).h_norm() <= 1e-14 * (1.0 + w.h_norm().powi(3)));
        }
    }

    #[test]
    fn closed_forms_match_quadrature_on_random_fields() {
        let mut r = rng(31);
        for n in 1..=4 {
            let w = random_field::<f64>(&mut r, n);
            for kind in [OscillatoryKind::CubicAiry, OscillatoryKind::CubicSchrodinger, OscillatoryKind::BurgersAiry] {
                let diff = (&closed_form_average(kind, &w) - &oracle(kind, &w)).h_norm();
                assert!(diff <= 1e-10 * (1.0 + w.h_norm().powi(3)), "{kind:?} N={n}: {diff}");
            }
        }
    }

    #[test]
    fn dissipativity_of_n_and_m() {
        let mut r = rng(41);
        for _ in 0..200 {
            let n = (uniform(&mut r, 0.0, 9.0)) as usize;
            let w = random_field::<f64>(&mut r, n).scale_real(uniform(&mut r, 0.1, 5.0));
            for avg in [averaged_n(&w), averaged_m(&w)] {
                let (pair, quartic) = dissipativity(&avg, &w);
                assert!(pair.re >= quartic - 1e-10);
                assert!(pair.im.abs() <= 1e-12 * quartic.max(1e-300) + 1e-300);
            }
        }
    }

    #[test]
    fn group_equivariance() {
        let mut r = rng(51);
        for _ in 0..50 {
            let w = random_field::<f64>(&mut r, 7);
            let s = uniform(&mut r, -10.0, 10.0);
            let hw = apply_group(GroupKind::Airy, 1.0, s, &w);
            let lhs = averaged_n(&hw);
            let rhs = apply_group(GroupKind::Airy, 1.0, s, &averaged_n(&w));
            assert!((&lhs - &rhs).h_norm() < 1e-12);
            let fw = apply_group(GroupKind::Schrodinger, 1.0, s, &w);
            let lhs = averaged_m(&fw);
            let rhs = apply_group(GroupKind::Schrodinger, 1.0, s, &averaged_m(&w));
            assert!((&lhs - &rhs).h_norm() < 1e-12);
        }
    }

    #[test]
    fn per_mode_phase_equivariance_of_m() {
        let mut r = rng(61);
        for _ in 0..50 {
            let w = random_field::<f64>(&mut r, 6);
            let phases: Vec<f64> = (0..13).map(|_| uniform(&mut r, 0.0, std::f64::consts::TAU)).collect();
            let rotate = |f: &F| f.map_modes(|n, c| c * cis(phases[(n + 6) as usize]));
            let lhs = averaged_m(&rotate(&w));
            let rhs = rotate(&averaged_m(&w));
            assert!((&lhs - &rhs).h_norm() < 1e-13);
        }
    }

    #[test]
    fn cubic_norm_ratio_is_bounded() {
        let mut r = rng(71);
        let mut worst = 0.0f64;
        for _ in 0..200 {
            let w = random_field::<f64>(&mut r, 8).scale_real(uniform(&mut r, 0.1, 3.0));
            let tau = uniform(&mut r, 0.0, std::f64::consts::TAU);
            let f = oscillatory_eval(OscillatoryKind::CubicAiry, tau, &w);
            worst = worst.max(f.h1_norm() / w.h1_norm().powi(3));
        }
        // sup|u| ≤ (π coth π)^{1/2}‖u‖_{H¹} and (u²ū)' has three terms, so the
        // ratio cannot exceed 3π coth π; truncation only lowers it
        let ceiling = 3.0 * std::f64::consts::PI / std::f64::consts::PI.tanh();
        assert!(worst.is_finite() && worst < ceiling, "ratio {worst}");
    }
}
