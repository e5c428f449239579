//! Equilibria of the reduced GL2 system `v̇_n = (−n² + α)v_n − 2v_n‖v‖² + v_n|v_n|²`
//! and their stability.
//!
//! A nonzero equilibrium is determined up to per-mode phases by its support
//! `S`: with `N₀ = |S|` and `N₂ = Σ_{n∈S} n²`,
//! `‖v‖² = (N₀α − N₂)/(2N₀ − 1)` and `|v_n|² = n² + (α − 2N₂)/(2N₀ − 1)`,
//! both of which must be positive. Only one-mode equilibria with `k² < α/2`
//! are stable, and a nonzero equilibrium fails to be normally hyperbolic
//! exactly when `k² + (α − 2N₂)/(2N₀ − 1) = 0` for some `k ∉ S`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::spectral::SpectralField;
use crate::Cx;

/// Largest `D` accepted by [`enumerate_equilibria`] (the search visits `2^{2D+1}` supports).
pub const MAX_ENUMERATION_D: usize = 12;

/// Largest `D` accepted by [`linearization_spectrum`].
pub const MAX_LINEARIZATION_D: usize = 2048;

/// Distance below which a mode modulus or eigenvalue counts as zero.
const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stability {
    Stable,
    Unstable,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumRecord {
    /// Modes with `v_n ≠ 0`, increasing; empty for the zero equilibrium.
    pub support: Vec<i64>,
    /// `|v_n|²` for each support mode, in the same order.
    pub moduli: Vec<f64>,
    pub n0: usize,
    pub n2: i64,
    pub norm_sq: f64,
    pub stability: Stability,
    pub hyperbolic: bool,
}

impl EquilibriumRecord {
    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    /// Representative on the real hyperplane, `v_n = +√|v_n|²`.
    pub fn real_point(&self, truncation: usize) -> SpectralField<f64> {
        SpectralField::from_fn(truncation, |n| match self.support.iter().position(|&k| k == n) {
            Some(i) => Cx::new(self.moduli[i].sqrt(), 0.0),
            None => Cx::new(0.0, 0.0),
        })
    }

    /// `|v_n|` pattern over `|n| ≤ truncation`, ordered from `−N` to `N`.
    pub fn modulus_pattern(&self, truncation: usize) -> Vec<f64> {
        let n = truncation as i64;
        (-n..=n)
            .map(|k| match self.support.iter().position(|&m| m == k) {
                Some(i) => self.moduli[i].sqrt(),
                None => 0.0,
            })
            .collect()
    }

    /// Support formatted as `{-1;1}` (semicolons keep CSV columns intact).
    pub fn support_label(&self) -> String {
        let inner: Vec<String> = self.support.iter().map(|n| n.to_string()).collect();
        format!("{{{}}}", inner.join(";"))
    }
}

/// Residual `max_{n∈S} |−n² + α − 2‖v‖² + |v_n|²|` of the equilibrium equations on the support.
pub fn equilibrium_residual(record: &EquilibriumRecord, alpha: f64) -> f64 {
    let norm_sq: f64 = record.moduli.iter().sum();
    record
        .support
        .iter()
        .zip(&record.moduli)
        .map(|(&n, &m)| (-((n * n) as f64) + alpha - 2.0 * norm_sq + m).abs())
        .fold(0.0, f64::max)
}

fn zero_record(alpha: f64, d: usize) -> EquilibriumRecord {
    let d = d as i64;
    let hyperbolic = (-d..=d).all(|k| (alpha - (k * k) as f64).abs() > DEGENERACY_TOL);
    EquilibriumRecord {
        support: Vec::new(),
        moduli: Vec::new(),
        n0: 0,
        n2: 0,
        norm_sq: 0.0,
        stability: if alpha < 0.0 { Stability::Stable } else { Stability::Unstable },
        hyperbolic,
    }
}

/// All equilibria supported in `|n| ≤ D`, the zero equilibrium first, then by
/// support size and lexicographic support.
pub fn enumerate_equilibria(alpha: f64, d: usize) -> Result<Vec<EquilibriumRecord>> {
    if d > MAX_ENUMERATION_D {
        return Err(Error::EnumerationTooLarge(d));
    }
    let width = 2 * d + 1;
    let modes: Vec<i64> = (-(d as i64)..=d as i64).collect();
    let mut records = vec![zero_record(alpha, d)];
    for mask in 1u32..(1u32 << width) {
        let support: Vec<i64> = (0..width).filter(|&i| mask & (1 << i) != 0).map(|i| modes[i]).collect();
        let n0 = support.len();
        let n2: i64 = support.iter().map(|n| n * n).sum();
        let denom = (2 * n0 - 1) as f64;
        let norm_sq = (n0 as f64 * alpha - n2 as f64) / denom;
        let shift = (alpha - 2.0 * n2 as f64) / denom;
        let moduli: Vec<f64> = support.iter().map(|n| (n * n) as f64 + shift).collect();
        if !(norm_sq > 0.0 && moduli.iter().all(|&m| m > 0.0)) {
            continue;
        }
        let hyperbolic = modes
            .iter()
            .filter(|k| !support.contains(k))
            .all(|k| ((k * k) as f64 + shift).abs() > DEGENERACY_TOL);
        let stability = if n0 == 1 && 2.0 * (n2 as f64) < alpha {
            Stability::Stable
        } else {
            Stability::Unstable
        };
        records.push(EquilibriumRecord {
            support,
            moduli,
            n0,
            n2,
            norm_sq,
            stability,
            hyperbolic,
        });
    }
    records[1..].sort_by(|a, b| a.n0.cmp(&b.n0).then_with(|| a.support.cmp(&b.support)));
    Ok(records)
}

/// Eigenvalues, in increasing order, of the linearization on the real hyperplane
/// `θ̇_n = (−n² + α − 2‖v‖² + 3v_n²)θ_n − 4v_n(v, θ)` restricted to `|n| ≤ D`.
pub fn linearization_spectrum(record: &EquilibriumRecord, alpha: f64, d: usize) -> Result<Vec<f64>> {
    if d > MAX_LINEARIZATION_D {
        return Err(Error::DimensionOverflow(d));
    }
    let v = record.real_point(d);
    let width = 2 * d + 1;
    let values: Vec<f64> = v.coeffs().iter().map(|c| c.re).collect();
    let norm_sq: f64 = values.iter().map(|x| x * x).sum();
    let jacobian = DMatrix::from_fn(width, width, |i, j| {
        let n = i as i64 - d as i64;
        let diagonal = if i == j {
            -((n * n) as f64) + alpha - 2.0 * norm_sq + 3.0 * values[i] * values[i]
        } else {
            0.0
        };
        diagonal - 4.0 * values[i] * values[j]
    });
    let mut eigenvalues: Vec<f64> = SymmetricEigen::new(jacobian).eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    Ok(eigenvalues)
}

/// Stability verdict read off the spectrum (all eigenvalues negative).
pub fn spectrum_verdict(eigenvalues: &[f64]) -> Stability {
    if eigenvalues.iter().all(|&l| l < 0.0) {
        Stability::Stable
    } else {
        Stability::Unstable
    }
}

/// Whether the spectrum has no eigenvalue within `tol` of zero.
pub fn spectrum_is_hyperbolic(eigenvalues: &[f64], tol: f64) -> bool {
    eigenvalues.iter().all(|l| l.abs() > tol)
}
