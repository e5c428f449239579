//! Invariance of the low-mode space `H_D = span{e_n : |n| ≤ D}` under the
//! averaged GL2 flow, and decay of the modes with `n² > Re β`.

use crate::error::Result;
use crate::models::{Frame, ModelSpec};
use crate::random::{random_field, rng, with_h_norm};
use crate::scalar::Cx;
use crate::spectral::SpectralField;
use crate::timestep::{integrate, SimConfig};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HdConfig {
    pub d: usize,
    pub horizon: f64,
    pub h: f64,
    /// Number of random fields in the static leakage check.
    pub samples: usize,
    pub seed: u64,
}

impl HdConfig {
    pub fn new(d: usize, horizon: f64) -> Self {
        Self {
            d,
            horizon,
            h: 0.01,
            samples: 20,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HdReport {
    pub beta: Cx<f64>,
    pub d: usize,
    /// Largest `|RHS_n|`, `|n| > D`, over random fields in `H_D` embedded in `|n| ≤ 2D`.
    pub leakage: f64,
    /// `max |w_n(T)|` over `n² > Re β`, from random data on `|n| ≤ 2D`.
    pub decayed_max: f64,
    /// The modes entering `decayed_max`.
    pub decaying_modes: Vec<i64>,
}

/// Runs both checks for the averaged GL2 equation with parameters `β`, `ω`.
pub fn hd_invariance_check(beta: Cx<f64>, omega: f64, config: &HdConfig) -> Result<HdReport> {
    let d = config.d as i64;
    let truncation = 2 * config.d;
    let model = ModelSpec::gl2(Frame::Averaged, beta, omega, 1.0);
    let mut r = rng(config.seed);
    let mut leakage: f64 = 0.0;
    for _ in 0..config.samples {
        let low = with_h_norm(&random_field(&mut r, config.d), 1.0).resized(truncation);
        let rhs = model.rhs(0.0, &low)?;
        for (n, c) in rhs.modes() {
            if n.abs() > d {
                leakage = leakage.max(c.norm());
            }
        }
    }
    let w0: SpectralField<f64> = with_h_norm(&random_field(&mut r, truncation), 1.0);
    let sim = SimConfig::new(truncation, config.h, config.horizon).sample_every(usize::MAX);
    let (_, end) = integrate(&model, &sim, &w0).into_result()?;
    let decaying_modes: Vec<i64> = (-(truncation as i64)..=truncation as i64)
        .filter(|n| (n * n) as f64 > beta.re)
        .collect();
    let decayed_max = decaying_modes.iter().map(|&n| end.get(n).norm()).fold(0.0, f64::max);
    Ok(HdReport {
        beta,
        d: config.d,
        leakage,
        decayed_max,
        decaying_modes,
    })
}
