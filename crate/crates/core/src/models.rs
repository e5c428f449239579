//! Right-hand-side catalogue.
//!
//! The three dispersive equations on (−π, π)
//!
//! * GL1: `u_t = (1+iγ)u_xx + βu − (1+iω)u|u|² + L u_xxx`
//! * GL2: `u_t = (1+iL)u_xx + βu − (1+iω)u|u|²`
//! * KS:  `u_t = −u_xxxx − a u_xx + u u_x + L u_xxx`
//!
//! each come in three frames: physical, rotating (`u = H_L(t)w` or
//! `u = F_L(t)w`, which moves the dispersion into a nonlinearity oscillating
//! at `τ = Lt`) and averaged (the `L → ∞` limit). Three standalone systems
//! complete the catalogue: the damped-driven KdV equation obtained from KS by
//! rescaling, the real-coefficient reduction of averaged GL2, and a
//! three-dimensional ODE describing averaged GL1 on the invariant manifold
//! `y e₀ + v(e₁ + e₋₁)`.
//!
//! Every PDE right-hand side is split into a diagonal part
//! ([`ModelSpec::linear_symbol`]) and the remainder
//! ([`ModelSpec::nonlinear_rhs`]); the exponential integrator treats the
//! first exactly.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::groups::{apply_group, GroupKind};
use crate::nonlinear::{averaged_k, averaged_m, averaged_n, burgers_term, gl_cubic, oscillatory_eval, OscillatoryKind};
use crate::scalar::{cis, Cx, Real};
use crate::spectral::SpectralField;
use crate::timestep::{OdeState, TrajectoryLog};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Gl1,
    Gl2,
    Ks,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Frame {
    Physical,
    Rotating,
    Averaged,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Pde { family: Family, frame: Frame },
    /// `∂_τ v = ε(−∂ₓ⁴v − a∂ₓ²v) + v∂ₓv + ∂ₓ³v`
    KdvRescaled,
    /// `v̇_n = (−n² + α)v_n − 2v_n‖v‖² + v_n|v_n|²`
    Gl2Reduced,
    /// Three-dimensional reduction of averaged GL1.
    Ode3,
}

/// Physical parameters. Fields that a model does not use are ignored.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams<T: Real> {
    /// Dispersive part `γ` of the GL1 diffusion coefficient `1 + iγ`.
    pub gamma_diff: T,
    /// Linear growth `β = α + iγ₄`; GL2Reduced and ODE3 use only its real part.
    pub beta: Cx<T>,
    /// Dispersive part `ω` of the cubic coefficient `1 + iω`.
    pub omega: T,
    /// KS anti-diffusion coefficient.
    pub a: T,
    /// Dispersion strength.
    pub l: T,
    /// Damping `ε` of the rescaled KdV equation.
    pub eps: T,
    /// Multiplier of the nonlinear term (1 for the equations as written).
    pub coupling: T,
}

impl<T: Real> Default for ModelParams<T> {
    fn default() -> Self {
        Self {
            gamma_diff: T::zero(),
            beta: Cx::zero(),
            omega: T::zero(),
            a: T::zero(),
            l: T::zero(),
            eps: T::zero(),
            coupling: T::one(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelSpec<T: Real> {
    pub kind: ModelKind,
    pub params: ModelParams<T>,
}

impl<T: Real> ModelSpec<T> {
    pub fn gl1(frame: Frame, gamma_diff: T, beta: Cx<T>, omega: T, l: T) -> Self {
        Self {
            kind: ModelKind::Pde { family: Family::Gl1, frame },
            params: ModelParams {
                gamma_diff,
                beta,
                omega,
                l,
                ..Default::default()
            },
        }
    }

    pub fn gl2(frame: Frame, beta: Cx<T>, omega: T, l: T) -> Self {
        Self {
            kind: ModelKind::Pde { family: Family::Gl2, frame },
            params: ModelParams {
                beta,
                omega,
                l,
                ..Default::default()
            },
        }
    }

    pub fn ks(frame: Frame, a: T, l: T) -> Self {
        Self {
            kind: ModelKind::Pde { family: Family::Ks, frame },
            params: ModelParams { a, l, ..Default::default() },
        }
    }

    pub fn kdv_rescaled(a: T, eps: T) -> Self {
        Self {
            kind: ModelKind::KdvRescaled,
            params: ModelParams { a, eps, ..Default::default() },
        }
    }

    pub fn gl2_reduced(alpha: T) -> Self {
        Self {
            kind: ModelKind::Gl2Reduced,
            params: ModelParams {
                beta: Cx::new(alpha, T::zero()),
                ..Default::default()
            },
        }
    }

    pub fn ode3(beta: T, gamma: T, omega: T) -> Self {
        Self {
            kind: ModelKind::Ode3,
            params: ModelParams {
                beta: Cx::new(beta, gamma),
                omega,
                ..Default::default()
            },
        }
    }

    pub fn with_coupling(mut self, coupling: T) -> Self {
        self.params.coupling = coupling;
        self
    }

    /// Same family in another frame; standalone models are returned unchanged.
    pub fn in_frame(mut self, frame: Frame) -> Self {
        if let ModelKind::Pde { family, .. } = self.kind {
            self.kind = ModelKind::Pde { family, frame };
        }
        self
    }

    pub fn family(&self) -> Option<Family> {
        match self.kind {
            ModelKind::Pde { family, .. } => Some(family),
            _ => None,
        }
    }

    pub fn frame(&self) -> Option<Frame> {
        match self.kind {
            ModelKind::Pde { frame, .. } => Some(frame),
            _ => None,
        }
    }

    /// `ε = 1/L` for the PDE families (zero when `L = 0`), the stored `ε` for rescaled KdV.
    pub fn eps(&self) -> T {
        match self.kind {
            ModelKind::KdvRescaled => self.params.eps,
            _ if self.params.l.is_zero() => T::zero(),
            _ => self.params.l.recip(),
        }
    }

    /// States must be real with zero mean.
    pub fn requires_real_zero_mean(&self) -> bool {
        matches!(
            self.kind,
            ModelKind::Pde { family: Family::Ks, .. } | ModelKind::KdvRescaled
        )
    }

    /// Group that links the physical and rotating frames.
    pub fn group(&self) -> Option<GroupKind> {
        match self.family()? {
            Family::Gl1 | Family::Ks => Some(GroupKind::Airy),
            Family::Gl2 => Some(GroupKind::Schrodinger),
        }
    }

    /// Whether `n²` sits close enough to `a` that the linearization about zero
    /// has a neutral mode.
    pub fn ks_is_degenerate(&self, truncation: usize) -> bool {
        if self.family() != Some(Family::Ks) && self.kind != ModelKind::KdvRescaled {
            return false;
        }
        (1..=truncation as i64).any(|n| (self.params.a - T::from_int(n * n)).abs() < T::lit(1e-12))
    }

    fn cubic_coefficient(&self) -> Cx<T> {
        -Cx::new(T::one(), self.params.omega) * self.params.coupling
    }

    /// Diagonal Fourier symbol `λ_n` of the linear part.
    pub fn linear_symbol(&self, n: i64) -> Result<Cx<T>> {
        let p = &self.params;
        let k2 = T::from_int(n * n);
        let k3 = T::from_int(n * n * n);
        let k4 = k2 * k2;
        let i = Cx::new(T::zero(), T::one());
        Ok(match self.kind {
            ModelKind::Pde { family, frame } => {
                let dispersive = frame == Frame::Physical;
                match family {
                    Family::Gl1 => {
                        let base = -Cx::new(T::one(), p.gamma_diff) * k2 + p.beta;
                        if dispersive {
                            base - i * (p.l * k3)
                        } else {
                            base
                        }
                    }
                    Family::Gl2 => {
                        if dispersive {
                            -Cx::new(T::one(), p.l) * k2 + p.beta
                        } else {
                            Cx::new(-k2, T::zero()) + p.beta
                        }
                    }
                    Family::Ks => {
                        let base = Cx::new(-k4 + p.a * k2, T::zero());
                        if dispersive {
                            base - i * (p.l * k3)
                        } else {
                            base
                        }
                    }
                }
            }
            ModelKind::KdvRescaled => Cx::new(p.eps * (-k4 + p.a * k2), -k3),
            ModelKind::Gl2Reduced => Cx::new(-k2 + p.beta.re, T::zero()),
            ModelKind::Ode3 => return Err(Error::NotPde("ode3 has no Fourier symbol")),
        })
    }

    /// Symbols for all modes `|n| ≤ N`, ordered from `−N` to `N`.
    pub fn symbols(&self, truncation: usize) -> Result<Vec<Cx<T>>> {
        let n = truncation as i64;
        (-n..=n).map(|k| self.linear_symbol(k)).collect()
    }

    pub fn check_flags(&self, w: &SpectralField<T>) -> Result<()> {
        if self.requires_real_zero_mean() {
            if !w.is_real() {
                return Err(Error::FlagMismatch("state must be real"));
            }
            if !w.is_zero_mean() {
                return Err(Error::FlagMismatch("state must have zero mean"));
            }
        }
        Ok(())
    }

    /// Everything in the right-hand side that is not the diagonal symbol.
    pub fn nonlinear_rhs(&self, t: T, w: &SpectralField<T>) -> Result<SpectralField<T>> {
        self.check_flags(w)?;
        let p = &self.params;
        let tau = t * p.l;
        Ok(match self.kind {
            ModelKind::Pde { family, frame } => match (family, frame) {
                (Family::Gl1 | Family::Gl2, Frame::Physical) => gl_cubic(w).scale(self.cubic_coefficient()),
                (Family::Gl1, Frame::Rotating) => {
                    oscillatory_eval(OscillatoryKind::CubicAiry, tau, w).scale(self.cubic_coefficient())
                }
                (Family::Gl2, Frame::Rotating) => {
                    oscillatory_eval(OscillatoryKind::CubicSchrodinger, tau, w).scale(self.cubic_coefficient())
                }
                (Family::Gl1, Frame::Averaged) => averaged_n(w).scale(self.cubic_coefficient()),
                (Family::Gl2, Frame::Averaged) => averaged_m(w).scale(self.cubic_coefficient()),
                (Family::Ks, Frame::Physical) => burgers_term(w).scale_real(p.coupling),
                (Family::Ks, Frame::Rotating) => {
                    oscillatory_eval(OscillatoryKind::BurgersAiry, tau, w).scale_real(p.coupling)
                }
                // K vanishes identically on real zero-mean fields
                (Family::Ks, Frame::Averaged) => SpectralField::zeros(w.truncation()),
            },
            ModelKind::KdvRescaled => burgers_term(w).scale_real(p.coupling),
            ModelKind::Gl2Reduced => {
                let two_norm_sq = T::lit(2.0) * w.norm_sq();
                w.map_modes(|_, c| c * ((c.norm_sqr() - two_norm_sq) * p.coupling))
            }
            ModelKind::Ode3 => return Err(Error::NotPde("ode3 has no spectral right-hand side")),
        })
    }

    /// Full right-hand side `λ ⊙ w + nonlinear_rhs(t, w)`.
    pub fn rhs(&self, t: T, w: &SpectralField<T>) -> Result<SpectralField<T>> {
        let nl = self.nonlinear_rhs(t, w)?;
        let symbols = self.symbols(w.truncation())?;
        let offset = w.truncation() as i64;
        let linear = w.map_modes(|n, c| c * symbols[(n + offset) as usize]);
        let mut out = &linear + &nl;
        if self.requires_real_zero_mean() {
            out = out.symmetrized().without_mean();
        }
        Ok(out)
    }

    /// The KS averaged frame evaluated through the closed-form `K`, for
    /// states outside the real zero-mean class.
    pub fn averaged_ks_general(w: &SpectralField<T>) -> SpectralField<T> {
        averaged_k(w)
    }
}

/// Full right-hand side of the rescaled KdV equation.
pub fn rhs_rescaled_kdv<T: Real>(a: T, eps: T, v: &SpectralField<T>) -> Result<SpectralField<T>> {
    ModelSpec::kdv_rescaled(a, eps).rhs(T::zero(), v)
}

/// Full right-hand side of the real-coefficient reduced GL2 system.
pub fn rhs_reduced_gl2<T: Real>(alpha: T, v: &SpectralField<T>) -> SpectralField<T> {
    let two_norm_sq = T::lit(2.0) * v.norm_sq();
    v.map_modes_with_flags(v.is_real(), v.is_zero_mean(), |n, c| {
        c * (-T::from_int(n * n) + alpha - two_norm_sq + c.norm_sqr())
    })
}

/// Default truncation for the reduced GL2 system, `⌈√max(α, 0)⌉ + 1`.
pub fn default_reduced_truncation<T: Real>(alpha: T) -> usize {
    alpha.max(T::zero()).sqrt().ceil().as_f64() as usize + 1
}

/// State of the three-dimensional reduction: `r = |y|²`, `ρ = |v|²`,
/// `η = 2(arg v − arg y)`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Ode3State<T: Real> {
    pub r: T,
    pub rho: T,
    pub eta: T,
}

impl<T: Real> Ode3State<T> {
    pub fn new(r: T, rho: T, eta: T) -> Self {
        Self { r, rho, eta }
    }

    pub fn to_array(self) -> [T; 3] {
        [self.r, self.rho, self.eta]
    }

    pub fn from_array(x: [T; 3]) -> Self {
        Self::new(x[0], x[1], x[2])
    }
}

impl<T: Real> OdeState<T> for Ode3State<T> {
    fn add_scaled(&self, k: T, other: &Self) -> Self {
        Self::new(self.r + k * other.r, self.rho + k * other.rho, self.eta + k * other.eta)
    }

    fn all_finite(&self) -> bool {
        self.r.is_finite() && self.rho.is_finite() && self.eta.is_finite()
    }

    fn max_abs(&self) -> T {
        self.r.abs().max(self.rho.abs())
    }
}

/// Vector field of the three-dimensional reduction.
pub fn rhs_ode3<T: Real>(beta: T, gamma: T, omega: T, s: &Ode3State<T>) -> Ode3State<T> {
    let Ode3State { r, rho, eta } = *s;
    let (sin, cos) = eta.sin_cos();
    let two = T::lit(2.0);
    let dr = r * (beta - r - T::lit(4.0) * rho - two * rho * (cos - omega * sin));
    let drho = rho * (beta - T::one() - two * r - T::lit(3.0) * rho - r * (cos + omega * sin));
    let deta = -gamma + omega * (rho - r) + r * (sin - omega * cos) + two * rho * (sin + omega * cos);
    Ode3State::new(dr, drho, deta)
}

/// Rebuilds averaged-GL2 states `w_n = e^{iA_n}v_n` from a reduced trajectory,
/// with `A_n(t) = ∫₀ᵗ (γ − 2ω‖v‖² + ω|v_n|²)` integrated by the trapezoid rule
/// over the snapshots.
pub fn phase_reconstruction<T: Real>(v: &TrajectoryLog<T>, gamma: T, omega: T) -> Result<TrajectoryLog<T>> {
    let snaps = v.snapshots();
    if snaps.is_empty() {
        return Err(Error::MissingSnapshots);
    }
    let truncation = snaps[0].1.truncation();
    let width = 2 * truncation + 1;
    let rate = |field: &SpectralField<T>| -> Vec<T> {
        let two_norm_sq = T::lit(2.0) * field.norm_sq();
        field
            .coeffs()
            .iter()
            .map(|c| gamma - omega * two_norm_sq + omega * c.norm_sqr())
            .collect()
    };
    let mut phase = vec![T::zero(); width];
    let mut prev_rate = rate(&snaps[0].1);
    let mut prev_t = snaps[0].0;
    let mut out = v.clone();
    let half = T::lit(0.5);
    let mut rebuilt = Vec::with_capacity(snaps.len());
    for (k, (t, field)) in snaps.iter().enumerate() {
        if k > 0 {
            let current = rate(field);
            let dt = *t - prev_t;
            for ((a, r0), r1) in phase.iter_mut().zip(&prev_rate).zip(&current) {
                *a += half * dt * (*r0 + *r1);
            }
            prev_rate = current;
            prev_t = *t;
        }
        let offset = truncation as i64;
        let w = field.map_modes(|n, c| c * cis(phase[(n + offset) as usize]));
        rebuilt.push((*t, w));
    }
    out.replace_snapshots(rebuilt);
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameDirection {
    /// `w(t) = G_L(−t)u(t)`.
    ToRotating,
    /// `u(t) = G_L(t)w(t)`.
    ToPhysical,
}

/// Converts every snapshot between the physical and the rotating frame.
pub fn frame_transform<T: Real>(
    log: &TrajectoryLog<T>,
    kind: GroupKind,
    l: T,
    direction: FrameDirection,
) -> Result<TrajectoryLog<T>> {
    if log.snapshots().is_empty() {
        return Err(Error::MissingSnapshots);
    }
    let sign = match direction {
        FrameDirection::ToRotating => -T::one(),
        FrameDirection::ToPhysical => T::one(),
    };
    let mut out = log.clone();
    let moved = log
        .snapshots()
        .iter()
        .map(|(t, w)| (*t, apply_group(kind, l, sign * *t, w)))
        .collect();
    out.replace_snapshots(moved);
    Ok(out)
}
