//! Convergence of reduced GL2 trajectories to equilibrium tori, with the
//! gradient structure checked along the way.

use rayon::prelude::*;

use crate::analysis::equilibria::{enumerate_equilibria, EquilibriumRecord};
use crate::analysis::lyapunov::lyapunov_rate;
use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::random::{random_field, rng, with_h_norm};
use crate::spectral::SpectralField;
use crate::timestep::{integrate, SimConfig};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradientConfig {
    /// Modes `|n| ≤ D` are simulated and enumerated.
    pub d: usize,
    pub h: f64,
    pub horizon: f64,
    pub ensemble: usize,
    pub base_seed: u64,
    /// Modulus-pattern distance below which a member counts as converged.
    pub membership_tol: f64,
    /// Largest step-to-step increase of the functional tolerated as round-off.
    pub monotone_tol: f64,
    /// Relative tolerance of the `dL/dt = −2Σ|v̇_n|²` check.
    pub rate_tol: f64,
    /// The rate check skips states with `Σ|v̇_n|²` below this.
    pub rate_floor: f64,
}

impl GradientConfig {
    pub fn new(d: usize, horizon: f64, ensemble: usize) -> Self {
        Self {
            d,
            h: 0.01,
            horizon,
            ensemble,
            base_seed: 0,
            membership_tol: 1e-4,
            monotone_tol: 1e-8,
            rate_tol: 0.05,
            rate_floor: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MemberReport {
    pub seed: u64,
    /// Index into [`GradientReport::equilibria`] of the nearest modulus pattern.
    pub nearest: usize,
    pub distance: f64,
    pub converged: bool,
    /// Largest `L(t_{k+1}) − L(t_k)` over all steps (nonpositive for a monotone run).
    pub max_increase: f64,
    /// Largest relative mismatch between the centred difference of `L` and `−2Σ|v̇_n|²`.
    pub max_rate_error: f64,
    /// Number of steps entering the rate check.
    pub rate_points: usize,
}

impl MemberReport {
    pub fn is_monotone(&self, tol: f64) -> bool {
        self.max_increase <= tol
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradientReport {
    pub alpha: f64,
    pub equilibria: Vec<EquilibriumRecord>,
    pub members: Vec<MemberReport>,
}

impl GradientReport {
    /// Members whose final state matched no torus within tolerance.
    pub fn unresolved(&self) -> impl Iterator<Item = &MemberReport> {
        self.members.iter().filter(|m| !m.converged)
    }
}

fn modulus_distance(v: &SpectralField<f64>, pattern: &[f64]) -> f64 {
    v.coeffs()
        .iter()
        .zip(pattern)
        .map(|(c, p)| (c.norm() - p).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Nearest equilibrium torus to `v` by modulus pattern: `(index, distance)`.
pub fn nearest_torus(v: &SpectralField<f64>, equilibria: &[EquilibriumRecord]) -> (usize, f64) {
    equilibria
        .iter()
        .enumerate()
        .map(|(i, r)| (i, modulus_distance(v, &r.modulus_pattern(v.truncation()))))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("the zero equilibrium is always present")
}

/// Integrates one member from `v0` and evaluates all checks.
pub fn run_gradient_member(
    alpha: f64,
    v0: &SpectralField<f64>,
    seed: u64,
    equilibria: &[EquilibriumRecord],
    config: &GradientConfig,
) -> Result<MemberReport> {
    let sim = SimConfig::new(config.d, config.h, config.horizon).snapshot_every(1);
    let (log, end) = integrate(&ModelSpec::gl2_reduced(alpha), &sim, v0).into_result()?;
    let values: Vec<f64> = log.samples().iter().map(|s| s.lyapunov.expect("reduced runs record L")).collect();
    let times = log.times();
    let max_increase = values.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let mut max_rate_error: f64 = 0.0;
    let mut rate_points = 0;
    let snaps = log.snapshots();
    for k in 1..values.len().saturating_sub(1) {
        let dt = times[k + 1] - times[k - 1];
        // the last step may be shortened; only use symmetric stencils
        if ((times[k + 1] - times[k]) - (times[k] - times[k - 1])).abs() > 1e-12 {
            continue;
        }
        let predicted = lyapunov_rate(&snaps[k].1, alpha);
        if -predicted / 2.0 < config.rate_floor {
            continue;
        }
        let measured = (values[k + 1] - values[k - 1]) / dt;
        max_rate_error = max_rate_error.max(((measured - predicted) / predicted).abs());
        rate_points += 1;
    }
    let (nearest, distance) = nearest_torus(&end, equilibria);
    Ok(MemberReport {
        seed,
        nearest,
        distance,
        converged: distance <= config.membership_tol,
        max_increase,
        max_rate_error,
        rate_points,
    })
}

/// Random unit-H-norm data on `|n| ≤ D`, integrated in parallel; members are
/// listed in seed order.
pub fn gradient_convergence_experiment(alpha: f64, config: &GradientConfig) -> Result<GradientReport> {
    if config.ensemble == 0 {
        return Err(Error::Config("gradient experiment needs a nonempty ensemble".into()));
    }
    let equilibria = enumerate_equilibria(alpha, config.d)?;
    let members = (0..config.ensemble as u64)
        .into_par_iter()
        .map(|k| {
            let seed = config.base_seed + k;
            let v0 = with_h_norm(&random_field(&mut rng(seed), config.d), 1.0);
            run_gradient_member(alpha, &v0, seed, &equilibria, config)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GradientReport {
        alpha,
        equilibria,
        members,
    })
}
