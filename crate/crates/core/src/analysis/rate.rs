//! Measured rate at which rotating-frame solutions approach the averaged ones
//! as the dispersion `L = 1/ε` grows.

use crate::analysis::fit::log_log_slope;
use crate::error::{Error, Result};
use crate::models::{Family, Frame, ModelSpec};
use crate::spectral::SpectralField;
use crate::timestep::{integrate, SimConfig};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateConfig {
    pub horizon: f64,
    /// Both frames are integrated with `h = step_factor / L`.
    pub step_factor: f64,
}

impl Default for RateConfig {
    fn default() -> Self {
        Self {
            horizon: 1.0,
            step_factor: 0.1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateRow {
    pub l: f64,
    /// `‖w_ε(T) − ŵ(T)‖_{H¹}`.
    pub error_h1: f64,
}

#[derive(Debug)]
pub struct RateReport {
    pub rows: Vec<RateRow>,
    /// Least-squares slope of `log e` against `log ε`; `None` with fewer than
    /// two positive errors.
    pub slope: Option<f64>,
    /// Set when a run blew up; `rows` then holds the values of `L` completed before it.
    pub aborted: Option<Error>,
}

/// For each `L`, integrates the rotating and the averaged form of `model`
/// (GL1 or GL2; its frame and `L` are overridden) from the same `w0` to the
/// horizon and records the `H¹` distance of the end states.
pub fn averaging_rate_experiment(
    model: &ModelSpec<f64>,
    w0: &SpectralField<f64>,
    l_list: &[f64],
    config: &RateConfig,
) -> Result<RateReport> {
    match model.family() {
        Some(Family::Gl1 | Family::Gl2) => {}
        _ => return Err(Error::Config("averaging-rate experiment needs a GL1 or GL2 model".into())),
    }
    if l_list.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::Config("dispersion values must be positive".into()));
    }
    let mut rows = Vec::with_capacity(l_list.len());
    let mut aborted = None;
    for &l in l_list {
        let mut spec = *model;
        spec.params.l = l;
        let sim = SimConfig::new(w0.truncation(), config.step_factor / l, config.horizon).sample_every(usize::MAX);
        let rotating = integrate(&spec.in_frame(Frame::Rotating), &sim, w0).outcome;
        let averaged = integrate(&spec.in_frame(Frame::Averaged), &sim, w0).outcome;
        match (rotating, averaged) {
            (Ok(a), Ok(b)) => rows.push(RateRow {
                l,
                error_h1: (&a - &b).h1_norm(),
            }),
            (Err(e), _) | (_, Err(e)) => {
                aborted = Some(e);
                break;
            }
        }
    }
    let slope = log_log_slope(&rows.iter().map(|r| (1.0 / r.l, r.error_h1)).collect::<Vec<_>>());
    Ok(RateReport { rows, slope, aborted })
}

/// Smooth test datum supported on `|n| ≤ 3`: `w_n = (0.5 + 0.03in)/(1 + n²)`.
pub fn smooth_datum(truncation: usize) -> SpectralField<f64> {
    SpectralField::from_fn(truncation, |n| {
        if n.abs() <= 3 {
            crate::Cx::new(0.5, 0.03 * n as f64) / (1.0 + (n * n) as f64)
        } else {
            crate::Cx::new(0.0, 0.0)
        }
    })
}
