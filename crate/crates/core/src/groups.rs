//! Solution groups of the linear dispersive equations `v_t = L v_xxx` (Airy)
//! and `v_t = i L v_xx` (Schrödinger), acting diagonally on Fourier modes.

use crate::scalar::{cis, Cx, Real};
use crate::spectral::SpectralField;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GroupKind {
    /// `e_n ↦ e^{−iLn³t} e_n`
    Airy,
    /// `e_n ↦ e^{−iLn²t} e_n`
    Schrodinger,
}

impl GroupKind {
    /// Dispersion relation `n³` or `n²`.
    #[inline]
    pub fn dispersion(self, n: i64) -> i64 {
        match self {
            GroupKind::Airy => n * n * n,
            GroupKind::Schrodinger => n * n,
        }
    }
}

#[inline]
fn two_prod<T: Real>(a: T, b: T) -> (T, T) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Reduces the double-word angle `hi + lo` into `[−π, π]`.
fn reduce_angle<T: Real>(hi: T, lo: T) -> T {
    let tau = T::TAU();
    let k = (hi / tau).round();
    if k == T::zero() {
        return hi + lo;
    }
    let (p, e) = two_prod(k, tau);
    ((hi - p) - e) + (lo - k * T::tau_lo())
}

/// Phase `L·t·φ(n)` reduced mod 2π, evaluated with a double-word product so
/// large `L|n|³t` does not lose the fractional part.
pub fn reduced_phase<T: Real>(kind: GroupKind, l: T, t: T, n: i64) -> T {
    let (hi, lo) = two_prod(l, t);
    let base = reduce_angle(hi, lo);
    let weight = T::from_int(kind.dispersion(n));
    let (hi, lo) = two_prod(base, weight);
    reduce_angle(hi, lo)
}

/// Unit multipliers `e^{−iLφ(n)t}` for `|n| ≤ N`, ordered from `−N` to `N`.
pub fn phases<T: Real>(kind: GroupKind, l: T, t: T, truncation: usize) -> Vec<Cx<T>> {
    let n = truncation as i64;
    (-n..=n)
        .map(|k| {
            if k == 0 {
                Cx::new(T::one(), T::zero())
            } else {
                cis(-reduced_phase(kind, l, t, k))
            }
        })
        .collect()
}

/// `H_L(t) w` (Airy) or `F_L(t) w` (Schrödinger).
pub fn apply_group<T: Real>(kind: GroupKind, l: T, t: T, w: &SpectralField<T>) -> SpectralField<T> {
    if l.is_zero() || t.is_zero() {
        return w.clone();
    }
    let table = phases(kind, l, t, w.truncation());
    let offset = w.truncation() as i64;
    let real = w.is_real() && kind == GroupKind::Airy;
    w.map_modes_with_flags(real, w.is_zero_mean(), |n, c| c * table[(n + offset) as usize])
}
