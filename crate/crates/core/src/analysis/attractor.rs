//! Ensemble estimates of the attractor size as a function of the dispersion `L`.
//!
//! Each member starts from seeded random data of unit H-norm (real and
//! zero-mean for KS), is integrated to the horizon, and contributes its
//! time-averaged `‖u‖_H` over `[burn_in, T]`; the statistic for one `L` is the
//! maximum over the ensemble.

use rayon::prelude::*;

use crate::analysis::fit::log_log_slope;
use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::random::{random_field, random_real_field, rng, with_h_norm};
use crate::spectral::SpectralField;
use crate::timestep::{integrate, SimConfig};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanConfig {
    pub truncation: usize,
    pub horizon: f64,
    pub burn_in: f64,
    pub ensemble: usize,
    /// The step is `min(h_max, step_factor / L)`, keeping `hL` bounded.
    pub step_factor: f64,
    pub h_max: f64,
    /// Norms are sampled every `sample_interval` time units.
    pub sample_interval: f64,
    /// Member `k` uses seed `base_seed + k` for every `L`.
    pub base_seed: u64,
}

impl ScanConfig {
    pub fn step(&self, l: f64) -> f64 {
        self.h_max.min(self.step_factor / l)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > self.burn_in) || self.burn_in < 0.0 {
            return Err(Error::Config("attractor scan needs 0 ≤ burn_in < T".into()));
        }
        if self.ensemble == 0 || self.truncation == 0 {
            return Err(Error::Config("attractor scan needs a nonempty ensemble and N ≥ 1".into()));
        }
        if !(self.step_factor > 0.0 && self.h_max > 0.0 && self.sample_interval > 0.0) {
            return Err(Error::Config("attractor scan step sizes must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MemberRun {
    pub l: f64,
    pub seed: u64,
    /// `(t, ‖u(t)‖_H)` samples, including `t = 0`.
    pub norms: Vec<(f64, f64)>,
    /// Time-averaged `‖u‖_H` on `[burn_in, T]`; `None` after a blow-up.
    pub time_average: Option<f64>,
    /// Time of blow-up, if any.
    pub blow_up: Option<f64>,
}

impl MemberRun {
    /// `sup_t (‖u(t)‖² − ‖u₀‖²e^{−t}) / (L² + 1)`: the smallest `C` for which
    /// this run satisfies `‖u(t)‖² ≤ ‖u₀‖²e^{−t} + C(L² + 1)`.
    pub fn dissipative_constant(&self) -> f64 {
        let u0_sq = self.norms.first().map_or(0.0, |s| s.1 * s.1);
        self.norms
            .iter()
            .map(|&(t, n)| (n * n - u0_sq * (-t).exp()) / (self.l * self.l + 1.0))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanRow {
    pub l: f64,
    /// Maximum over completed members of the time-averaged norm.
    pub statistic: f64,
    pub completed: usize,
    pub blow_ups: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanReport {
    pub rows: Vec<ScanRow>,
    /// Ordered by `L`, then seed.
    pub members: Vec<MemberRun>,
    /// Log-log slope of the statistic against `L`.
    pub slope: Option<f64>,
}

impl ScanReport {
    /// `(max − min)/min` of the statistic across `L`.
    pub fn relative_spread(&self) -> Option<f64> {
        let values: Vec<f64> = self.rows.iter().filter(|r| r.completed > 0).map(|r| r.statistic).collect();
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (!values.is_empty() && lo > 0.0).then(|| (hi - lo) / lo)
    }

    /// Dissipative constant fitted on the largest-`L` members.
    pub fn fitted_dissipative_constant(&self) -> Option<f64> {
        let l_max = self.rows.iter().map(|r| r.l).fold(f64::NEG_INFINITY, f64::max);
        self.members
            .iter()
            .filter(|m| m.l == l_max && m.blow_up.is_none())
            .map(MemberRun::dissipative_constant)
            .reduce(f64::max)
    }

    /// Members whose norm history exceeds `‖u₀‖²e^{−t} + C(L² + 1)`.
    pub fn bound_violations(&self, c: f64) -> Vec<&MemberRun> {
        self.members.iter().filter(|m| m.dissipative_constant() > c).collect()
    }
}

/// Unit-H-norm random initial datum for `model` (real zero-mean when required).
pub fn ensemble_datum(model: &ModelSpec<f64>, truncation: usize, seed: u64) -> SpectralField<f64> {
    let mut r = rng(seed);
    let raw = if model.requires_real_zero_mean() {
        random_real_field(&mut r, truncation)
    } else {
        random_field(&mut r, truncation)
    };
    with_h_norm(&raw, 1.0)
}

fn run_member(model: &ModelSpec<f64>, l: f64, seed: u64, config: &ScanConfig) -> MemberRun {
    let mut spec = *model;
    spec.params.l = l;
    let h = config.step(l);
    let every = ((config.sample_interval / h).round() as usize).max(1);
    let sim = SimConfig::new(config.truncation, h, config.horizon).sample_every(every).seed(seed);
    let run = integrate(&spec, &sim, &ensemble_datum(&spec, config.truncation, seed));
    let norms = run.log.samples().iter().map(|s| (s.t, s.h_norm)).collect();
    match run.outcome {
        Ok(_) => MemberRun {
            l,
            seed,
            norms,
            time_average: run.log.time_averaged_h_norm(config.burn_in),
            blow_up: None,
        },
        Err(e) => MemberRun {
            l,
            seed,
            norms,
            time_average: None,
            blow_up: Some(match e {
                Error::BlowUp { t } => t,
                _ => f64::NAN,
            }),
        },
    }
}

/// Runs the ensemble for every `L` in parallel; `model`'s own `L` is ignored.
/// Blown-up members are counted per row and the scan carries on.
pub fn attractor_norm_scan(model: &ModelSpec<f64>, l_list: &[f64], config: &ScanConfig) -> Result<ScanReport> {
    config.validate()?;
    if l_list.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::Config("dispersion values must be positive".into()));
    }
    let jobs: Vec<(f64, u64)> = l_list
        .iter()
        .flat_map(|&l| (0..config.ensemble as u64).map(move |k| (l, config.base_seed + k)))
        .collect();
    // collect keeps job order, so the merge is deterministic
    let members: Vec<MemberRun> = jobs.par_iter().map(|&(l, seed)| run_member(model, l, seed, config)).collect();
    let rows: Vec<ScanRow> = l_list
        .iter()
        .map(|&l| {
            let mine: Vec<&MemberRun> = members.iter().filter(|m| m.l == l).collect();
            let averages: Vec<f64> = mine.iter().filter_map(|m| m.time_average).collect();
            ScanRow {
                l,
                statistic: averages.iter().copied().fold(f64::NAN, f64::max),
                completed: averages.len(),
                blow_ups: mine.iter().filter(|m| m.blow_up.is_some()).count(),
            }
        })
        .collect();
    let slope = log_log_slope(
        &rows
            .iter()
            .filter(|r| r.completed > 0)
            .map(|r| (r.l, r.statistic))
            .collect::<Vec<_>>(),
    );
    Ok(ScanReport { rows, members, slope })
}
