//! Largest Lyapunov exponent by two-trajectory renormalization, plus the
//! equilibrium finder and parameter scan for the three-dimensional GL1 reduction.

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::{rhs_ode3, Ode3State};
use crate::timestep::rk4_step;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentConfig {
    pub h: f64,
    /// Averaging window after the transient.
    pub horizon: f64,
    /// Steps between renormalizations of the separation.
    pub renorm_every: usize,
    /// Time during which the separation aligns before its growth is accumulated.
    pub transient: f64,
    /// Separation of the companion trajectory.
    pub separation: f64,
}

impl Default for ExponentConfig {
    fn default() -> Self {
        Self {
            h: 0.01,
            horizon: 1000.0,
            renorm_every: 10,
            transient: 100.0,
            separation: 1e-8,
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Estimates the top exponent of `ẋ = rhs(x)` along the orbit of `x0`.
///
/// A companion trajectory starts at distance `separation` along the diagonal
/// direction; every `renorm_every` steps the separation's log-growth is
/// accumulated and the companion is pulled back to distance `separation`.
pub fn largest_lyapunov_exponent(
    rhs: impl Fn(&[f64]) -> Vec<f64>,
    x0: &[f64],
    config: &ExponentConfig,
) -> Result<f64> {
    if !(config.h > 0.0) || config.renorm_every == 0 || !(config.horizon > 0.0) {
        return Err(Error::Config("exponent estimator needs h > 0, horizon > 0, renorm_every ≥ 1".into()));
    }
    let f = |_: f64, x: &Vec<f64>| rhs(x);
    let mut t = 0.0;
    let mut x = x0.to_vec();
    let dim = x.len() as f64;
    let mut y: Vec<f64> = x.iter().map(|xi| xi + config.separation / dim.sqrt()).collect();
    let transient_blocks = ((config.transient / config.h).round() as usize).div_ceil(config.renorm_every);
    let blocks = ((config.horizon / config.h).round() as usize).div_ceil(config.renorm_every);
    let mut log_growth = 0.0;
    let mut elapsed = 0.0;
    // during the transient the separation is renormalized but not counted, so
    // it has time to align with the most unstable direction
    for block in 0..transient_blocks + blocks {
        for _ in 0..config.renorm_every {
            x = rk4_step(f, t, config.h, &x)?;
            y = rk4_step(f, t, config.h, &y)?;
            t += config.h;
        }
        let delta: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
        let d = norm(&delta);
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::BlowUp { t });
        }
        if block >= transient_blocks {
            log_growth += (d / config.separation).ln();
            elapsed += config.h * config.renorm_every as f64;
        }
        y = x.iter().zip(&delta).map(|(xi, di)| xi + di * config.separation / d).collect();
    }
    Ok(log_growth / elapsed)
}

/// Vector field of the three-dimensional reduction in array form.
pub fn ode3_field(beta: f64, gamma: f64, omega: f64) -> impl Fn(&[f64]) -> Vec<f64> {
    move |x: &[f64]| {
        let d = rhs_ode3(beta, gamma, omega, &Ode3State::new(x[0], x[1], x[2]));
        vec![d.r, d.rho, d.eta]
    }
}

fn ode3_jacobian(beta: f64, omega: f64, s: &Ode3State<f64>) -> Matrix3<f64> {
    let Ode3State { r, rho, eta } = *s;
    let (sn, cs) = eta.sin_cos();
    // ṙ = r[β − r − 4ρ − 2ρ(cos η − ω sin η)]
    let fr = beta - r - 4.0 * rho - 2.0 * rho * (cs - omega * sn);
    let j00 = fr - r;
    let j01 = r * (-4.0 - 2.0 * (cs - omega * sn));
    let j02 = r * (-2.0 * rho * (-sn - omega * cs));
    // ρ̇ = ρ[β − 1 − 2r − 3ρ − r(cos η + ω sin η)]
    let fp = beta - 1.0 - 2.0 * r - 3.0 * rho - r * (cs + omega * sn);
    let j10 = rho * (-2.0 - (cs + omega * sn));
    let j11 = fp - 3.0 * rho;
    let j12 = rho * (-r * (-sn + omega * cs));
    // η̇ = −γ + ω(ρ − r) + r(sin η − ω cos η) + 2ρ(sin η + ω cos η)
    let j20 = -omega + (sn - omega * cs);
    let j21 = omega + 2.0 * (sn + omega * cs);
    let j22 = r * (cs + omega * sn) + 2.0 * rho * (cs - omega * sn);
    Matrix3::new(j00, j01, j02, j10, j11, j12, j20, j21, j22)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ode3Equilibrium {
    pub state: Ode3State<f64>,
    pub residual: f64,
    /// Largest real part of the Jacobian eigenvalues.
    pub max_real_eigenvalue: f64,
}

/// Newton's method on the three-dimensional vector field from `guess`.
pub fn ode3_equilibrium(beta: f64, gamma: f64, omega: f64, guess: Ode3State<f64>) -> Result<Ode3Equilibrium> {
    let mut s = guess;
    let residual_of = |s: &Ode3State<f64>| {
        let d = rhs_ode3(beta, gamma, omega, s);
        Vector3::new(d.r, d.rho, d.eta)
    };
    let mut residual = residual_of(&s).norm();
    for _ in 0..100 {
        if residual < 1e-14 {
            break;
        }
        let j = ode3_jacobian(beta, omega, &s);
        let step = j.lu().solve(&residual_of(&s)).ok_or(Error::NewtonDiverged {
            iterations: 0,
            residual,
        })?;
        s = Ode3State::new(s.r - step[0], s.rho - step[1], s.eta - step[2]);
        residual = residual_of(&s).norm();
    }
    if !(residual < 1e-10) {
        return Err(Error::NewtonDiverged {
            iterations: 100,
            residual,
        });
    }
    let eig = ode3_jacobian(beta, omega, &s).complex_eigenvalues();
    let max_real_eigenvalue = eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    Ok(Ode3Equilibrium {
        state: s,
        residual,
        max_real_eigenvalue,
    })
}

/// Closed-form equilibrium on the invariant plane `ρ = 0` when `ω = 0` and
/// `|γ| < β`: `r = β`, `sin η = γ/β`, `cos η < 0`. It is stable.
pub fn ode3_planar_equilibrium(beta: f64, gamma: f64) -> Option<Ode3State<f64>> {
    (beta > 0.0 && gamma.abs() < beta).then(|| Ode3State::new(beta, 0.0, std::f64::consts::PI - (gamma / beta).asin()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ode3ScanRow {
    pub beta: f64,
    pub gamma: f64,
    pub omega: f64,
    /// `None` when the orbit blew up.
    pub lambda1: Option<f64>,
}

/// Top exponent over a `(β, γ, ω)` grid from a fixed initial point; rows are
/// ordered by β, then γ, then ω.
pub fn ode3_scan(
    betas: &[f64],
    gammas: &[f64],
    omegas: &[f64],
    x0: Ode3State<f64>,
    config: &ExponentConfig,
) -> Vec<Ode3ScanRow> {
    let mut grid = Vec::new();
    for &beta in betas {
        for &gamma in gammas {
            for &omega in omegas {
                grid.push((beta, gamma, omega));
            }
        }
    }
    grid.par_iter()
        .map(|&(beta, gamma, omega)| {
            let lambda1 =
                largest_lyapunov_exponent(ode3_field(beta, gamma, omega), &x0.to_array(), config).ok();
            Ode3ScanRow {
                beta,
                gamma,
                omega,
                lambda1,
            }
        })
        .collect()
}
