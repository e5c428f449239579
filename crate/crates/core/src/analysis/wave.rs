//! Rotating waves `v(τ, x) = V(x − cτ)` of the damped-driven KdV equation
//! `∂_τ v = ε(−∂ₓ⁴v − a∂ₓ²v) + v∂ₓv + ∂ₓ³v`.
//!
//! Substituting the ansatz gives, mode by mode for `n = 1..N`,
//! `R_n = −c(in)V_n − [ε(−n⁴ + an²) − in³]V_n − (in/2)(V²)_n = 0`,
//! with `V` real and zero-mean. Translations act as `V_n ↦ e^{−ins}V_n`, so one
//! phase condition `Im V₁ = 0` is added; the unknowns are `V₁..V_N` (real and
//! imaginary parts) and `c`, and Newton's method is applied to the square
//! `(2N + 1)` real system.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Cx;
use crate::spectral::SpectralField;

/// Newton stops once the residual H-norm falls below this.
pub const WAVE_TOLERANCE: f64 = 1e-12;

/// Profiles with H-norm below this count as the trivial branch `V = 0`.
pub const AMPLITUDE_FLOOR: f64 = 1e-3;

const MAX_ITERATIONS: usize = 60;

#[derive(Clone, Debug, PartialEq)]
pub struct WaveRecord {
    /// Real zero-mean profile `V`.
    pub profile: SpectralField<f64>,
    pub speed: f64,
    pub eps: f64,
    /// H-norm of the mode residual `R`.
    pub residual: f64,
}

fn unknowns_to_profile(x: &DVector<f64>, truncation: usize) -> (SpectralField<f64>, f64) {
    let positive: Vec<Cx<f64>> = (1..=truncation).map(|n| Cx::new(x[2 * n - 1], x[2 * n])).collect();
    (SpectralField::real_from_positive(0.0, &positive), x[0])
}

fn profile_to_unknowns(v: &SpectralField<f64>, c: f64) -> DVector<f64> {
    let n = v.truncation();
    let mut x = DVector::zeros(2 * n + 1);
    x[0] = c;
    for k in 1..=n {
        let z = v.get(k as i64);
        x[2 * k - 1] = z.re;
        x[2 * k] = z.im;
    }
    x
}

/// `(V²)_n` for `n = 0..N`, by direct convolution over the truncation.
fn square_modes(v: &SpectralField<f64>) -> Vec<Cx<f64>> {
    let n = v.truncation() as i64;
    (0..=n)
        .map(|k| {
            let lo = (k - n).max(-n);
            let hi = n.min(k + n);
            (lo..=hi).map(|m| v.get(m) * v.get(k - m)).sum()
        })
        .collect()
}

fn linear_factor(a: f64, eps: f64, c: f64, n: i64) -> Cx<f64> {
    let nf = n as f64;
    // −c(in) − ε(−n⁴ + an²) + in³
    Cx::new(-eps * (-nf.powi(4) + a * nf * nf), -c * nf + nf.powi(3))
}

/// Mode residuals `R_n`, `n = −N..N`, of the travelling-wave equation.
pub fn wave_residual_field(a: f64, eps: f64, v: &SpectralField<f64>, c: f64) -> SpectralField<f64> {
    let sq = square_modes(v);
    let positive: Vec<Cx<f64>> = (1..=v.truncation() as i64)
        .map(|n| linear_factor(a, eps, c, n) * v.get(n) - Cx::new(0.0, n as f64 / 2.0) * sq[n as usize])
        .collect();
    SpectralField::real_from_positive(0.0, &positive)
}

fn system(a: f64, eps: f64, x: &DVector<f64>, truncation: usize) -> DVector<f64> {
    let (v, c) = unknowns_to_profile(x, truncation);
    let r = wave_residual_field(a, eps, &v, c);
    let mut out = DVector::zeros(2 * truncation + 1);
    for n in 1..=truncation {
        let z = r.get(n as i64);
        out[2 * n - 2] = z.re;
        out[2 * n - 1] = z.im;
    }
    out[2 * truncation] = x[2];
    out
}

fn jacobian(a: f64, eps: f64, x: &DVector<f64>, truncation: usize) -> DMatrix<f64> {
    let (v, c) = unknowns_to_profile(x, truncation);
    let dim = 2 * truncation + 1;
    let nmax = truncation as i64;
    let mut j = DMatrix::zeros(dim, dim);
    let mut put = |col: usize, dv: &dyn Fn(i64) -> Cx<f64>| {
        for n in 1..=nmax {
            let z = dv(n);
            j[(2 * n as usize - 2, col)] = z.re;
            j[(2 * n as usize - 1, col)] = z.im;
        }
    };
    put(0, &|n| Cx::new(0.0, -(n as f64)) * v.get(n));
    for m in 1..=nmax {
        for (offset, unit) in [(1usize, Cx::new(1.0, 0.0)), (2usize, Cx::new(0.0, 1.0))] {
            let col = 2 * m as usize - 2 + offset;
            let v = &v;
            put(col, &|n| {
                // δV_m = unit, δV_{−m} = conj(unit)
                let diag = if n == m { linear_factor(a, eps, c, n) * unit } else { Cx::new(0.0, 0.0) };
                let conv = v.get(n - m) * unit + v.get(n + m) * unit.conj();
                diag - Cx::new(0.0, n as f64) * conv
            });
        }
    }
    j[(dim - 1, 2)] = 1.0;
    j
}

/// Rotates a profile so that `V₁` is real and nonnegative.
pub fn pin_phase(v: &SpectralField<f64>) -> SpectralField<f64> {
    let v1 = v.get(1);
    if v1.norm() == 0.0 {
        return v.clone();
    }
    // V_n e^{−ins} with s = arg V₁
    v.translated(v1.arg()).symmetrized()
}

/// Two-harmonic starting profile from the weakly nonlinear balance:
/// the KdV part gives `V₂ ≈ V₁²/6`, `c ≈ 1 − V₁²/6`, and the energy balance
/// `Σ(an² − n⁴)|V_n|² = 0` then fixes `V₁² = 36(a − 1)/(16 − 4a)` (for `1 < a < 4`).
pub fn stokes_guess(a: f64, eps: f64, truncation: usize) -> WaveRecord {
    let gain = (a - 1.0).max(0.1);
    let loss = (16.0 - 4.0 * a).max(1.0);
    let v1_sq = 36.0 * gain / loss;
    let v1 = v1_sq.sqrt();
    let mut positive = vec![Cx::new(0.0, 0.0); truncation.max(2)];
    positive[0] = Cx::new(v1, 0.0);
    positive[1] = Cx::new(v1_sq / 6.0, 0.0);
    positive.truncate(truncation);
    WaveRecord {
        profile: SpectralField::real_from_positive(0.0, &positive),
        speed: 1.0 - v1_sq / 6.0,
        eps,
        residual: f64::INFINITY,
    }
}

fn newton(a: f64, eps: f64, guess: &WaveRecord, truncation: usize) -> Result<WaveRecord> {
    let start = pin_phase(&guess.profile.resized(truncation));
    if start.h_norm() < AMPLITUDE_FLOOR {
        return Err(Error::TrivialGuess(start.h_norm()));
    }
    let mut x = profile_to_unknowns(&start, guess.speed);
    let mut f = system(a, eps, &x, truncation);
    let mut norm = f.norm();
    for iteration in 0..MAX_ITERATIONS {
        if norm < WAVE_TOLERANCE {
            break;
        }
        let step = jacobian(a, eps, &x, truncation)
            .lu()
            .solve(&f)
            .ok_or(Error::NewtonDiverged { iterations: iteration, residual: norm })?;
        let mut damping = 1.0;
        loop {
            let trial = &x - &step * damping;
            let ft = system(a, eps, &trial, truncation);
            if ft.norm() < norm || damping < 1e-4 {
                x = trial;
                f = ft;
                norm = f.norm();
                break;
            }
            damping *= 0.5;
        }
        if !norm.is_finite() {
            return Err(Error::NewtonDiverged { iterations: iteration, residual: norm });
        }
    }
    let (profile, speed) = unknowns_to_profile(&x, truncation);
    let residual = wave_residual_field(a, eps, &profile, speed).h_norm();
    if !(residual < 1e-10) {
        return Err(Error::NewtonDiverged {
            iterations: MAX_ITERATIONS,
            residual,
        });
    }
    if profile.h_norm() < AMPLITUDE_FLOOR {
        return Err(Error::TrivialGuess(profile.h_norm()));
    }
    Ok(WaveRecord {
        profile,
        speed,
        eps,
        residual,
    })
}

/// Solves for a nontrivial rotating wave with `N = truncation` modes.
///
/// Without a guess, Newton starts from [`stokes_guess`]; if that stalls the
/// solution is continued from `ε = 0.2` (where the balance is strongly
/// selective) down to the requested `ε` by halving.
pub fn traveling_wave_solve(
    a: f64,
    eps: f64,
    truncation: usize,
    initial_guess: Option<&WaveRecord>,
) -> Result<WaveRecord> {
    if let Some(guess) = initial_guess {
        return newton(a, eps, guess, truncation);
    }
    let direct = newton(a, eps, &stokes_guess(a, eps, truncation), truncation);
    if direct.is_ok() {
        return direct;
    }
    let mut path = vec![eps];
    while *path.last().expect("nonempty") < 0.2 {
        let next = path.last().expect("nonempty") * 2.0;
        path.push(next);
    }
    path.reverse();
    let mut record = newton(a, path[0], &stokes_guess(a, path[0], truncation), truncation)?;
    for &e in &path[1..] {
        record = newton(a, e, &record, truncation)?;
    }
    Ok(record)
}

/// Solves along a list of `ε` values, each seeded by the previous solution.
pub fn wave_continuation(a: f64, eps_list: &[f64], truncation: usize) -> Result<Vec<WaveRecord>> {
    let mut out: Vec<WaveRecord> = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let record = traveling_wave_solve(a, eps, truncation, out.last())?;
        out.push(record);
    }
    Ok(out)
}
