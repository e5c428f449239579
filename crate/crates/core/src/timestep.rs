//! Time integration.
//!
//! PDE models are advanced with the fourth-order exponential time-differencing
//! Runge–Kutta scheme of Cox and Matthews: the diagonal symbol is integrated
//! exactly and the nonlinear remainder enters through the `φ₁, φ₂, φ₃`
//! functions. ODE systems use classical RK4.

use log::warn;
use num_traits::Zero;

use crate::analysis::lyapunov::lyapunov_value;
use crate::error::{Error, Result};
use crate::models::{ModelKind, ModelSpec};
use crate::scalar::{Cx, Real};
use crate::spectral::SpectralField;

/// Coefficient magnitude treated as blow-up.
pub const BLOW_UP_THRESHOLD: f64 = 1e12;

/// Below this `|z|` the `φ` functions are summed from their Taylor series.
const SERIES_RADIUS: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimConfig<T: Real> {
    pub truncation: usize,
    pub h: T,
    pub horizon: T,
    /// Norms are recorded every `sample_every` steps (and at the horizon).
    pub sample_every: usize,
    /// Full states are recorded every this many steps, if set.
    pub snapshot_every: Option<usize>,
    pub seed: u64,
}

impl<T: Real> SimConfig<T> {
    pub fn new(truncation: usize, h: T, horizon: T) -> Self {
        Self {
            truncation,
            h,
            horizon,
            sample_every: 1,
            snapshot_every: None,
            seed: 0,
        }
    }

    pub fn sample_every(mut self, steps: usize) -> Self {
        self.sample_every = steps.max(1);
        self
    }

    pub fn snapshot_every(mut self, steps: usize) -> Self {
        self.snapshot_every = Some(steps.max(1));
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.truncation < 1 {
            return Err(Error::Config("truncation must be at least 1".into()));
        }
        if !(self.h > T::zero()) || !self.h.is_finite() {
            return Err(Error::Config("step must be positive".into()));
        }
        if self.horizon < T::zero() || !self.horizon.is_finite() {
            return Err(Error::Config("horizon must be nonnegative".into()));
        }
        Ok(())
    }

    /// Number of steps needed to reach the horizon; the final step is
    /// shortened when `h` does not divide the horizon.
    pub fn step_count(&self) -> usize {
        if self.horizon.is_zero() {
            return 0;
        }
        let ratio = (self.horizon / self.h).as_f64();
        let rounded = ratio.round();
        if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) {
            rounded as usize
        } else {
            ratio.ceil() as usize
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample<T: Real> {
    pub t: T,
    pub h_norm: T,
    pub h1_norm: T,
    /// Lyapunov functional, recorded for the reduced GL2 system.
    pub lyapunov: Option<T>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct TrajectoryLog<T: Real> {
    samples: Vec<Sample<T>>,
    snapshots: Vec<(T, SpectralField<T>)>,
}

impl<T: Real> TrajectoryLog<T> {
    pub fn new() -> Self {
        Self {
            samples: Vec::new(),
            snapshots: Vec::new(),
        }
    }

    pub fn samples(&self) -> &[Sample<T>] {
        &self.samples
    }

    pub fn snapshots(&self) -> &[(T, SpectralField<T>)] {
        &self.snapshots
    }

    pub fn times(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn last_sample(&self) -> Option<&Sample<T>> {
        self.samples.last()
    }

    pub fn last_snapshot(&self) -> Option<&(T, SpectralField<T>)> {
        self.snapshots.last()
    }

    pub fn record(&mut self, t: T, w: &SpectralField<T>, lyapunov: Option<T>) {
        debug_assert!(self.samples.last().is_none_or(|s| s.t < t));
        self.samples.push(Sample {
            t,
            h_norm: w.h_norm(),
            h1_norm: w.h1_norm(),
            lyapunov,
        });
    }

    pub fn push_snapshot(&mut self, t: T, w: SpectralField<T>) {
        self.snapshots.push((t, w));
    }

    pub(crate) fn replace_snapshots(&mut self, snapshots: Vec<(T, SpectralField<T>)>) {
        self.snapshots = snapshots;
    }

    /// Mean of `‖u‖_H` over samples with `t ≥ from` (trapezoid rule in time).
    pub fn time_averaged_h_norm(&self, from: T) -> Option<T> {
        let kept: Vec<&Sample<T>> = self.samples.iter().filter(|s| s.t >= from).collect();
        match kept.len() {
            0 => None,
            1 => Some(kept[0].h_norm),
            _ => {
                let half = T::lit(0.5);
                let mut area = T::zero();
                for pair in kept.windows(2) {
                    area += half * (pair[1].t - pair[0].t) * (pair[0].h_norm + pair[1].h_norm);
                }
                Some(area / (kept[kept.len() - 1].t - kept[0].t))
            }
        }
    }
}

/// Result of an integration: the (possibly partial) log and the final state
/// or the blow-up error.
#[derive(Debug)]
pub struct Run<T: Real> {
    pub log: TrajectoryLog<T>,
    pub outcome: Result<SpectralField<T>>,
}

impl<T: Real> Run<T> {
    pub fn into_result(self) -> Result<(TrajectoryLog<T>, SpectralField<T>)> {
        let state = self.outcome?;
        Ok((self.log, state))
    }
}

/// `e^z − 1` without cancellation for small `|z|`.
fn expm1<T: Real>(z: Cx<T>) -> Cx<T> {
    let half_sin = (z.im * T::lit(0.5)).sin();
    let re = z.re.exp_m1() * z.im.cos() - T::lit(2.0) * half_sin * half_sin;
    let im = z.re.exp() * z.im.sin();
    Cx::new(re, im)
}

/// `(φ₁(z), φ₂(z), φ₃(z))` with `φ_k(z) = Σ_j z^j/(j+k)!`.
pub fn phi_functions<T: Real>(z: Cx<T>) -> (Cx<T>, Cx<T>, Cx<T>) {
    if z.norm() < T::lit(SERIES_RADIUS) {
        phi_series(z)
    } else {
        phi_closed(z)
    }
}

fn phi_series<T: Real>(z: Cx<T>) -> (Cx<T>, Cx<T>, Cx<T>) {
    // terms shrink at least like 0.5^j/j! on the series disc, so 20 terms reach 1e-25
    let mut phis = [Cx::zero(); 3];
    for (k, phi) in phis.iter_mut().enumerate() {
        let mut term = Cx::new(T::one() / T::lit(factorial(k + 1)), T::zero());
        let mut sum = term;
        for j in 1..20 {
            term = term * z / T::from_count(j + k + 1);
            sum += term;
        }
        *phi = sum;
    }
    (phis[0], phis[1], phis[2])
}

fn phi_closed<T: Real>(z: Cx<T>) -> (Cx<T>, Cx<T>, Cx<T>) {
    let phi1 = expm1(z) / z;
    let phi2 = (phi1 - T::one()) / z;
    let phi3 = (phi2 - T::lit(0.5)) / z;
    (phi1, phi2, phi3)
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

/// Per-mode coefficients of one exponential step of size `h`.
#[derive(Clone, Debug)]
struct EtdCoefficients<T: Real> {
    h: T,
    e: Vec<Cx<T>>,
    e_half: Vec<Cx<T>>,
    q: Vec<Cx<T>>,
    f1: Vec<Cx<T>>,
    f2: Vec<Cx<T>>,
    f3: Vec<Cx<T>>,
}

impl<T: Real> EtdCoefficients<T> {
    fn new(symbols: &[Cx<T>], h: T) -> Self {
        let len = symbols.len();
        let mut c = Self {
            h,
            e: Vec::with_capacity(len),
            e_half: Vec::with_capacity(len),
            q: Vec::with_capacity(len),
            f1: Vec::with_capacity(len),
            f2: Vec::with_capacity(len),
            f3: Vec::with_capacity(len),
        };
        let half = T::lit(0.5);
        let (two, three, four) = (T::lit(2.0), T::lit(3.0), T::lit(4.0));
        for &lambda in symbols {
            let z = lambda * h;
            c.e.push(z.exp());
            c.e_half.push((z * half).exp());
            let (p1_half, _, _) = phi_functions(z * half);
            c.q.push(p1_half * (h * half));
            let (p1, p2, p3) = phi_functions(z);
            c.f1.push((p1 - p2 * three + p3 * four) * h);
            c.f2.push((p2 - p3 * two) * h);
            c.f3.push((-p2 + p3 * four) * h);
        }
        c
    }
}

/// Stepper that caches the exponential coefficients for a model, truncation and step.
#[derive(Clone, Debug)]
pub struct Etdrk4<T: Real> {
    model: ModelSpec<T>,
    symbols: Vec<Cx<T>>,
    coefficients: EtdCoefficients<T>,
}

fn combine<T: Real>(
    template: &SpectralField<T>,
    parts: impl Fn(usize) -> Cx<T>,
) -> SpectralField<T> {
    let offset = template.truncation() as i64;
    template.map_modes(|n, _| parts((n + offset) as usize))
}

impl<T: Real> Etdrk4<T> {
    pub fn new(model: ModelSpec<T>, truncation: usize, h: T) -> Result<Self> {
        let symbols = model.symbols(truncation)?;
        let coefficients = EtdCoefficients::new(&symbols, h);
        Ok(Self {
            model,
            symbols,
            coefficients,
        })
    }

    pub fn h(&self) -> T {
        self.coefficients.h
    }

    pub fn model(&self) -> &ModelSpec<T> {
        &self.model
    }

    /// Single step from `t` with the cached step size.
    pub fn step(&self, t: T, w: &SpectralField<T>) -> Result<SpectralField<T>> {
        self.step_with(&self.coefficients, t, w)
    }

    /// Single step of arbitrary size (coefficients are rebuilt).
    pub fn step_sized(&self, t: T, h: T, w: &SpectralField<T>) -> Result<SpectralField<T>> {
        if h == self.coefficients.h {
            return self.step(t, w);
        }
        let c = EtdCoefficients::new(&self.symbols, h);
        self.step_with(&c, t, w)
    }

    fn step_with(&self, c: &EtdCoefficients<T>, t: T, u: &SpectralField<T>) -> Result<SpectralField<T>> {
        let h = c.h;
        let half = T::lit(0.5);
        let two = T::lit(2.0);
        let nu = self.model.nonlinear_rhs(t, u)?;
        let (uc, nuc) = (u.coeffs(), nu.coeffs());
        let a = self.admissible(combine(u, |i| c.e_half[i] * uc[i] + c.q[i] * nuc[i]));
        let na = self.model.nonlinear_rhs(t + h * half, &a)?;
        let nac = na.coeffs();
        let b = self.admissible(combine(u, |i| c.e_half[i] * uc[i] + c.q[i] * nac[i]));
        let nb = self.model.nonlinear_rhs(t + h * half, &b)?;
        let nbc = nb.coeffs();
        let ac = a.coeffs();
        let cs = self.admissible(combine(u, |i| c.e_half[i] * ac[i] + c.q[i] * (nbc[i] * two - nuc[i])));
        let nc = self.model.nonlinear_rhs(t + h, &cs)?;
        let ncc = nc.coeffs();
        let next = self.admissible(combine(u, |i| {
            c.e[i] * uc[i] + c.f1[i] * nuc[i] + c.f2[i] * (nac[i] + nbc[i]) * two + c.f3[i] * ncc[i]
        }));
        check_finite(&next, t + h)?;
        Ok(next)
    }

    /// Restores exact symmetry for models that require real zero-mean states.
    fn admissible(&self, w: SpectralField<T>) -> SpectralField<T> {
        if self.model.requires_real_zero_mean() {
            w.symmetrized().without_mean()
        } else {
            w
        }
    }
}

fn check_finite<T: Real>(w: &SpectralField<T>, t: T) -> Result<()> {
    let threshold = T::lit(BLOW_UP_THRESHOLD);
    if w.coeffs().iter().any(|c| !(c.re.is_finite() && c.im.is_finite()) || c.norm() > threshold) {
        return Err(Error::BlowUp { t: t.as_f64() });
    }
    Ok(())
}

/// One ETDRK4 step of size `h` from time `t`.
pub fn etdrk4_step<T: Real>(model: &ModelSpec<T>, t: T, h: T, w: &SpectralField<T>) -> Result<SpectralField<T>> {
    Etdrk4::new(*model, w.truncation(), h)?.step(t, w)
}

/// States that RK4 can advance.
pub trait OdeState<T: Real>: Clone {
    /// `self + k·other`.
    fn add_scaled(&self, k: T, other: &Self) -> Self;
    fn all_finite(&self) -> bool;
    /// Largest component magnitude, used for blow-up detection.
    fn max_abs(&self) -> T;
}

impl<T: Real> OdeState<T> for Vec<T> {
    fn add_scaled(&self, k: T, other: &Self) -> Self {
        self.iter().zip(other).map(|(a, b)| *a + k * *b).collect()
    }

    fn all_finite(&self) -> bool {
        self.iter().all(|x| x.is_finite())
    }

    fn max_abs(&self) -> T {
        self.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }
}

impl<T: Real> OdeState<T> for SpectralField<T> {
    fn add_scaled(&self, k: T, other: &Self) -> Self {
        self + &other.scale_real(k)
    }

    fn all_finite(&self) -> bool {
        self.coeffs().iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    fn max_abs(&self) -> T {
        SpectralField::max_abs(self)
    }
}

/// Classical fourth-order Runge–Kutta step.
pub fn rk4_step<T: Real, S: OdeState<T>>(rhs: impl Fn(T, &S) -> S, t: T, h: T, x: &S) -> Result<S> {
    let half = T::lit(0.5);
    let k1 = rhs(t, x);
    let k2 = rhs(t + half * h, &x.add_scaled(half * h, &k1));
    let k3 = rhs(t + half * h, &x.add_scaled(half * h, &k2));
    let k4 = rhs(t + h, &x.add_scaled(h, &k3));
    let sixth = h / T::lit(6.0);
    let third = h / T::lit(3.0);
    let next = x
        .add_scaled(sixth, &k1)
        .add_scaled(third, &k2)
        .add_scaled(third, &k3)
        .add_scaled(sixth, &k4);
    if !next.all_finite() || next.max_abs() > T::lit(BLOW_UP_THRESHOLD) {
        return Err(Error::BlowUp { t: (t + h).as_f64() });
    }
    Ok(next)
}

/// Warns when a rotating-frame run does not resolve the fast period `2π/L`.
pub fn check_rotating_step<T: Real>(model: &ModelSpec<T>, h: T) -> bool {
    if model.frame() != Some(crate::models::Frame::Rotating) || model.params.l.is_zero() {
        return true;
    }
    let limit = T::TAU() / model.params.l.abs() / T::lit(16.0);
    if h > limit {
        warn!(
            "step {:e} exceeds (2π/L)/16 = {:e}; the fast oscillation is under-resolved",
            h.as_f64(),
            limit.as_f64()
        );
        return false;
    }
    true
}

/// Integrates a PDE model from `w0` to the configured horizon.
pub fn integrate<T: Real>(model: &ModelSpec<T>, config: &SimConfig<T>, w0: &SpectralField<T>) -> Run<T> {
    let mut log = TrajectoryLog::new();
    let outcome = integrate_into(model, config, w0, &mut log);
    Run { log, outcome }
}

fn integrate_into<T: Real>(
    model: &ModelSpec<T>,
    config: &SimConfig<T>,
    w0: &SpectralField<T>,
    log: &mut TrajectoryLog<T>,
) -> Result<SpectralField<T>> {
    config.validate()?;
    if w0.truncation() != config.truncation {
        return Err(Error::TruncationMismatch {
            left: w0.truncation(),
            right: config.truncation,
        });
    }
    model.check_flags(w0)?;
    check_rotating_step(model, config.h);
    let alpha = model.params.beta.re;
    let reduced = model.kind == ModelKind::Gl2Reduced;
    let functional = |w: &SpectralField<T>| reduced.then(|| lyapunov_value(w, alpha));
    let stepper = Etdrk4::new(*model, config.truncation, config.h)?;
    let steps = config.step_count();
    let mut w = w0.clone();
    let mut t = T::zero();
    log.record(t, &w, functional(&w));
    if config.snapshot_every.is_some() {
        log.push_snapshot(t, w.clone());
    }
    for k in 1..=steps {
        let h = if k == steps { config.horizon - t } else { config.h };
        w = stepper.step_sized(t, h, &w)?;
        t = if k == steps { config.horizon } else { config.h * T::from_count(k) };
        if k % config.sample_every == 0 || k == steps {
            log.record(t, &w, functional(&w));
        }
        if let Some(every) = config.snapshot_every {
            if k % every == 0 || k == steps {
                log.push_snapshot(t, w.clone());
            }
        }
    }
    Ok(w)
}

/// Least-squares fit of `‖u(t)‖² ≈ ‖u₀‖²e^{−κt} + P` from samples, returning
/// `(κ, P)`: the plateau `P` is the mean over the last quarter of the run and
/// the decay rate is fitted to `log(‖u‖² − P)` on the samples where that
/// excess is positive. `κ` is `None` when fewer than two such samples exist.
pub fn fit_decay_plateau<T: Real>(log: &TrajectoryLog<T>) -> (Option<f64>, f64) {
    let samples = log.samples();
    if samples.is_empty() {
        return (None, 0.0);
    }
    let t_end = samples[samples.len() - 1].t.as_f64();
    let tail: Vec<f64> = samples
        .iter()
        .filter(|s| s.t.as_f64() >= 0.75 * t_end)
        .map(|s| s.h_norm.as_f64().powi(2))
        .collect();
    let plateau = tail.iter().sum::<f64>() / tail.len() as f64;
    let points: Vec<(f64, f64)> = samples
        .iter()
        .filter_map(|s| {
            let excess = s.h_norm.as_f64().powi(2) - plateau;
            (excess > 0.0 && s.t.as_f64() < 0.75 * t_end).then(|| (s.t.as_f64(), excess.ln()))
        })
        .collect();
    let rate = crate::analysis::fit::least_squares_slope(&points).map(|s| -s);
    (rate, plateau)
}
