//! Subcommand table and implementations.

use std::path::PathBuf;

use displab::analysis::attractor::{attractor_norm_scan, ScanConfig};
use displab::analysis::equilibria::{
    enumerate_equilibria, equilibrium_residual, linearization_spectrum, spectrum_verdict, Stability,
    MAX_LINEARIZATION_D,
};
use displab::analysis::exponent::{ode3_scan, ExponentConfig};
use displab::analysis::gradient::{gradient_convergence_experiment, GradientConfig};
use displab::analysis::hd::{hd_invariance_check, HdConfig};
use displab::analysis::rate::{averaging_rate_experiment, smooth_datum, RateConfig};
use displab::analysis::wave::wave_continuation;
use displab::models::{default_reduced_truncation, Frame, ModelSpec, Ode3State};
use displab::nonlinear::{closed_form_average, minimal_quadrature_points, quadrature_average, OscillatoryKind};
use displab::random::{random_field, random_real_field, rng, with_h_norm};
use displab::timestep::{integrate, SimConfig};
use displab::{Cx, Error, Field};

use crate::config::{key, optional, ConfigError, Key, Settings};
use crate::output::{num, opt_num, write_csv, write_field, write_summary};

/// Why a subcommand did not succeed; each maps to an exit status.
#[derive(Debug)]
pub enum Failure {
    Config(ConfigError),
    /// A checked property did not hold.
    Assertion(String),
    BlowUp(String),
    Io(std::io::Error),
    Numerical(Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(ConfigError::Unreadable(_)) => 66,
            Failure::Config(ConfigError::Invalid(_)) => 64,
            Failure::Assertion(_) => 2,
            Failure::BlowUp(_) => 3,
            Failure::Io(_) => 74,
            Failure::Numerical(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(e) => write!(f, "{e}"),
            Failure::Assertion(m) => write!(f, "check failed: {m}"),
            Failure::BlowUp(m) => write!(f, "blow-up: {m}"),
            Failure::Io(e) => write!(f, "i/o error: {e}"),
            Failure::Numerical(e) => write!(f, "{e}"),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BlowUp { t } => Failure::BlowUp(format!("at t = {t}")),
            Error::Config(m) => Failure::Config(ConfigError::Invalid(m)),
            other => Failure::Numerical(other),
        }
    }
}

pub struct Context {
    pub settings: Settings,
    pub out: PathBuf,
    pub seed: u64,
}

pub struct Command {
    pub name: &'static str,
    pub about: &'static str,
    pub keys: &'static [Key],
    pub run: fn(&Context) -> Result<(), Failure>,
}

const MODEL_KEYS: [Key; 7] = [
    key("gamma", "0.5", "GL1 diffusion dispersion γ"),
    key("beta_re", "1.0", "real part of β"),
    key("beta_im", "0.0", "imaginary part of β"),
    key("omega", "1.0", "nonlinear dispersion ω"),
    key("a", "2.0", "KS anti-diffusion coefficient"),
    key("L", "10.0", "dispersion L"),
    key("coupling", "1.0", "multiplier of the nonlinearity"),
];

macro_rules! keys {
    ($($k:expr),* $(,)?) => {
        &[key("seed", "0", "random seed"), $($k),*]
    };
}

pub const COMMANDS: &[Command] = &[
    Command {
        name: "oracle-check",
        about: "compare the closed-form averaged nonlinearities with exact quadrature",
        keys: keys![
            key("N", "8", "largest truncation; fields cycle through N = 1..N"),
            key("fields", "100", "number of random fields"),
            key("tol", "1e-10", "relative error tolerance"),
        ],
        run: oracle_check,
    },
    Command {
        name: "simulate",
        about: "integrate one trajectory of any spectral model",
        keys: keys![
            key("model", "gl1", "gl1 | gl2 | ks | kdv | gl2-reduced"),
            key("frame", "physical", "physical | rotating | averaged (gl1, gl2, ks)"),
            optional("N", "truncation (default 32; ceil(sqrt(alpha)) + 1 for gl2-reduced)"),
            key("T", "10.0", "horizon"),
            key("h", "0.01", "time step"),
            key("eps", "0.1", "ε of the rescaled KdV model"),
            key("alpha", "1.5", "α of the reduced GL2 model"),
            key("amplitude", "1.0", "H-norm of the random initial datum"),
            key("sample_every", "1", "steps between norm samples"),
            key("snapshot_every", "0", "steps between state snapshots (0: none)"),
            MODEL_KEYS[0],
            MODEL_KEYS[1],
            MODEL_KEYS[2],
            MODEL_KEYS[3],
            MODEL_KEYS[4],
            MODEL_KEYS[5],
            MODEL_KEYS[6],
        ],
        run: simulate,
    },
    Command {
        name: "averaging-rate",
        about: "distance between rotating-frame and averaged solutions as L grows",
        keys: keys![
            key("family", "gl2", "gl1 | gl2"),
            key("L_list", "50,100,200,400", "dispersion values"),
            key("T", "1.0", "horizon"),
            key("N", "32", "truncation"),
            key("step_factor", "0.1", "time step is step_factor / L"),
            key("slope_min", "0.8", "smallest accepted slope"),
            key("slope_max", "1.2", "largest accepted slope"),
            key("gamma", "0.5", "GL1 diffusion dispersion γ"),
            key("beta_re", "1.0", "real part of β"),
            key("beta_im", "0.5", "imaginary part of β"),
            key("omega", "1.0", "nonlinear dispersion ω"),
            key("coupling", "1.0", "multiplier of the nonlinearity"),
        ],
        run: averaging_rate,
    },
    Command {
        name: "attractor-scan",
        about: "ensemble attractor-size statistic against L",
        keys: keys![
            key("model", "ks", "gl1 | gl2 | ks"),
            key("frame", "physical", "physical | rotating | averaged"),
            key("L_list", "10,20,40,80", "dispersion values"),
            key("N", "64", "truncation"),
            key("T", "200.0", "horizon"),
            key("burn_in", "100.0", "start of the averaging window"),
            key("ensemble", "8", "members per L"),
            key("step_factor", "0.05", "time step is min(h_max, step_factor / L)"),
            key("h_max", "0.01", "largest time step"),
            key("sample_interval", "0.1", "time between norm samples"),
            optional("slope_min", "smallest accepted log-log slope (unchecked if unset)"),
            optional("slope_max", "largest accepted log-log slope (unchecked if unset)"),
            MODEL_KEYS[0],
            key("beta_re", "1.5", "real part of β"),
            MODEL_KEYS[2],
            MODEL_KEYS[3],
            MODEL_KEYS[4],
            MODEL_KEYS[6],
        ],
        run: attractor_scan,
    },
    Command {
        name: "equilibria",
        about: "enumerate and classify equilibria of the reduced GL2 system",
        keys: keys![
            key("alpha", "1.5", "α = Re β"),
            optional("D", "mode bound (default ceil(sqrt(alpha)) + 1)"),
        ],
        run: equilibria,
    },
    Command {
        name: "gradient-run",
        about: "random reduced GL2 runs: torus membership and Lyapunov checks",
        keys: keys![
            key("alpha", "1.5", "α = Re β"),
            optional("D", "mode bound (default ceil(sqrt(alpha)) + 1)"),
            key("T", "200.0", "horizon"),
            key("h", "0.01", "time step"),
            key("ensemble", "20", "number of members"),
            key("membership_tol", "1e-4", "modulus-pattern distance for convergence"),
        ],
        run: gradient_run,
    },
    Command {
        name: "wave",
        about: "rotating waves of the rescaled KdV equation, continued in ε",
        keys: keys![
            key("a", "2.0", "anti-diffusion coefficient (a > 1)"),
            key("eps_list", "0.05,0.025,0.0125", "ε values, solved in order"),
            key("N", "32", "truncation"),
        ],
        run: wave,
    },
    Command {
        name: "ode3-scan",
        about: "largest Lyapunov exponent of the 3D reduction over a parameter grid",
        keys: keys![
            key("beta_list", "1.0,1.5,2.0", "β values"),
            key("gamma_list", "0.2,0.6,1.0", "γ values"),
            key("omega_list", "0.0,1.0,2.0", "ω values"),
            key("r0", "0.5", "initial r"),
            key("rho0", "0.3", "initial ρ"),
            key("eta0", "1.0", "initial η"),
            key("h", "0.01", "RK4 step"),
            key("horizon", "200.0", "averaging window"),
            key("transient", "50.0", "alignment time before averaging"),
            key("renorm_every", "10", "steps between renormalizations"),
        ],
        run: ode3_scan_cmd,
    },
    Command {
        name: "hd-check",
        about: "invariance of low modes and decay of high modes under averaged GL2",
        keys: keys![
            key("beta_re", "1.5", "real part of β"),
            key("beta_im", "0.0", "imaginary part of β"),
            key("omega", "1.0", "nonlinear dispersion ω"),
            key("D", "2", "low-mode bound"),
            key("T", "50.0", "horizon"),
            key("h", "0.01", "time step"),
            key("tol", "1e-8", "decay tolerance"),
        ],
        run: hd_check,
    },
];

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Config(ConfigError::Invalid(msg.into()))
}

fn frame(s: &Settings) -> Result<Frame, Failure> {
    match s.raw("frame").unwrap_or("physical") {
        "physical" => Ok(Frame::Physical),
        "rotating" => Ok(Frame::Rotating),
        "averaged" => Ok(Frame::Averaged),
        other => Err(invalid(format!("unknown frame `{other}`"))),
    }
}

fn beta(s: &Settings) -> Result<Cx<f64>, Failure> {
    Ok(Cx::new(s.get("beta_re")?, s.get("beta_im")?))
}

/// GL1, GL2 or KS in the configured frame.
fn pde_model(s: &Settings, name: &str) -> Result<ModelSpec<f64>, Failure> {
    let f = frame(s)?;
    let l = s.get_opt("L")?.unwrap_or(1.0);
    let spec = match name {
        "gl1" => ModelSpec::gl1(f, s.get("gamma")?, beta(s)?, s.get("omega")?, l),
        "gl2" => ModelSpec::gl2(f, beta(s)?, s.get("omega")?, l),
        "ks" => ModelSpec::ks(f, s.get("a")?, l),
        other => return Err(invalid(format!("unknown model `{other}`"))),
    };
    Ok(spec.with_coupling(s.get("coupling")?))
}

fn oracle_check(ctx: &Context) -> Result<(), Failure> {
    let s = &ctx.settings;
    let n_max: usize = s.get("N")?;
    let fields: usize = s.get("fields")?;
    let tol: f64 = s.get("tol")?;
    if n_max == 0 {
        return Err(invalid("N must be at least 1"));
    }
    let kinds = [OscillatoryKind::CubicAiry, OscillatoryKind::CubicSchrodinger, OscillatoryKind::BurgersAiry];
    let mut worst = [0.0f64; 3];
    let mut r = rng(ctx.seed);
    for i in 0..fields {
        let n = 1 + i % n_max;
        let w: Field = random_field(&mut r, n);
        for (slot, kind) in worst.iter_mut().zip(kinds) {
            let quad = quadrature_average(kind, &w, minimal_quadrature_points(kind, n))?;
            let err = (&closed_form_average(kind, &w) - &quad).h_norm() / quad.h_norm().max(f64::MIN_POSITIVE);
            *slot = slot.max(err);
        }
    }
    write_csv(
        &ctx.out,
        "oracle.csv",
        "fields,max_err_n,max_err_m,max_err_k",
        &[vec![fields.to_string(), num(worst[0]), num(worst[1]), num(worst[2])]],
    )?;
    if worst.iter().any(|&e| !(e <= tol)) {
        return Err(Failure::Assertion(format!("oracle errors {worst:?} exceed {tol:e}")));
    }
    Ok(())
}

fn simulate(ctx: &Context) -> Result<(), Failure> {
    let s = &ctx.settings;
    let name = s.raw("model").unwrap_or("gl1");
    let alpha: f64 = s.get("alpha")?;
    let model = match name {
        "kdv" => ModelSpec::kdv_rescaled(s.get("a")?, s.get("eps")?).with_coupling(s.get("coupling")?),
        "gl2-reduced" => ModelSpec::gl2_reduced(alpha).with_coupling(s.get("coupling")?),
        other => pde_model(s, other)?,
    };
    let default_n = if name == "gl2-reduced" { default_reduced_truncation(alpha) } else { 32 };
    let n: usize = s.get_opt("N")?.unwrap_or(default_n);
    if n == 0 {
        return Err(invalid("N must be at least 1"));
    }
    let amplitude: f64 = s.get("amplitude")?;
    let mut r = rng(ctx.seed);
    let raw = if model.requires_real_zero_mean() {
        random_real_field(&mut r, n)
    } else {
        random_field(&mut r, n)
    };
    let w0 = with_h_norm(&raw, amplitude);
    let mut config = SimConfig::new(n, s.get("h")?, s.get("T")?)
        .sample_every(s.get("sample_every")?)
        .seed(ctx.seed);
    let snapshot_every: usize = s.get("snapshot_every")?;
    if snapshot_every > 0 {
        config = config.snapshot_every(snapshot_every);
    }
    let run = integrate(&model, &config, &w0);
    let rows: Vec<Vec<String>> = run
        .log
        .samples()
        .iter()
        .map(|x| vec![num(x.t), num(x.h_norm), num(x.h1_norm), opt_num(x.lyapunov)])
        .collect();
    write_csv(&ctx.out, "trajectory.csv", "t,h_norm,h1_norm,lyapunov", &rows)?;
    if snapshot_every > 0 {
        let mut index = Vec::new();
        for (k, (t, field)) in run.log.snapshots().iter().enumerate() {
            let file = format!("snapshots/snapshot_{k:06}.csv");
            write_field(&ctx.out, &file, field)?;
            index.push(vec![k.to_string(), num(*t), file]);
        }
        write_csv(&ctx.out, "snapshots/index.csv", "index,t,file", &index)?;
    }
    run.outcome.map(|_| ()).map_err(Failure::from)
}

fn averaging_rate(ctx: &Context) -> Result<(), Failure> {
    let s = &ctx.settings;
    let family = s.raw("family").unwrap_or("gl2");
    if !matches!(family, "gl1" | "gl2") {
        return Err(invalid(format!("averaging-rate needs family gl1 or gl2, got `{family}`")));
    }
    let model = pde_model(s, family)?;
    let ls: Vec<f64> = s.list("L_list")?;
    let w0 = smooth_datum(s.get("N")?);
    let config = RateConfig {
        horizon: s.get("T")?,
        step_factor: s.get("step_factor")?,
    };
    let report = averaging_rate_experiment(&model, &w0, &ls, &config)?;
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| vec![num(r.l), num(1.0 / r.l), num(r.error_h1)])
        .collect();
    write_csv(&ctx.out, "rate.csv", "L,eps,err_h1", &rows)?;
    write_summary(
        &ctx.out,
        &[
            ("family".into(), family.into()),
            ("slope".into(), opt_num(report.slope)),
            ("completed".into(), report.rows.len().to_string()),
        ],
    )?;
    if let Some(e) = report.aborted {
        return Err(e.into());
    }
    let (lo, hi): (f64, f64) = (s.get("slope_min")?, s.get("slope_max")?);
    match report.slope {
        Some(slope) if (lo..=hi).contains(&slope) => Ok(()),
        Some(slope) => Err(Failure::Assertion(format!("slope {slope} outside [{lo}, {hi}]"))),
        None => Err(Failure::Assertion("slope undefined (fewer than two positive errors)".into())),
    }
}

fn attractor_scan(ctx: &Context) -> Result<(), Failure> {
    let s = &ctx.settings;
    let model = pde_model(s, s.raw("model").unwrap_or("ks"))?;
    let ls: Vec<f64> = s.list("L_list")?;
    let config = ScanConfig {
        truncation: s.get("N")?,
        horizon: s.get("T")?,
        burn_in: s.get("burn_in")?,
        ensemble: s.get("ensemble")?,
        step_factor: s.get("step_factor")?,
        h_max: s.get("h_max")?,
        sample_interval: s.get("sample_interval")?,
        base_seed: ctx.seed,
    };
    let report = attractor_norm_scan(&model, &ls, &config)?;
    let rows: Vec<Vec<String>> = report
        .members
        .iter()
        .map(|m| vec![num(m.l), m.seed.to_string(), opt_num(m.time_average)])
        .collect();
    write_csv(&ctx.out, "scan.csv", "L,seed,stat", &rows)?;
    let mut summary = vec![("slope".to_string(), opt_num(report.slope))];
    for row in &report.rows {
        summary.push((format!("stat_L={}", row.l), num(row.statistic)));
        summary.push((format!("blow_ups_L={}", row.l), row.blow_ups.to_string()));
    }
    summary.push(("relative_spread".into(), opt_num(report.relative_spread())));
    summary.push(("dissipative_constant".into(), opt_num(report.fitted_dissipative_constant())));
    write_summary(&ctx.out, &summary)?;
    let bounds: (Option<f64>, Option<f64>) = (s.get_opt("slope_min")?, s.get_opt("slope_max")?);
    if bounds.0.is_some() || bounds.1.is_some() {
        let lo = bounds.0.unwrap_or(f64::NEG_INFINITY);
        let hi = bounds.1.unwrap_or(f64::INFINITY);
        match report.slope {
            Some(slope) if (lo..=hi).contains(&slope) => {}
            other => return Err(Failure::Assertion(format!("slope {other:?} outside [{lo}, {hi}]"))),
        }
    }
    Ok(())
}

fn reduced_d(s: &Settings, alpha: f64) -> Result<usize, Failure> {
    Ok(s.get_opt("D")?.unwrap_or_else(|| default_reduced_truncation(alpha)))
}

fn equilibria(ctx: &Context) -> Result<(), Failure> {
    let s = &ctx.settings;
    let alpha: f64 = s.get("alpha")?;
    let d = reduced_d(s, alpha)?;
    let records = enumerate_equilibria(alpha, d)?;
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            vec![
                r.support_label(),
                r.n0.to_string(),
                r.n2.to_string(),
                num(r.norm_sq),
                (r.stability == Stability::Stable).to_string(),
                r.hyperbolic.to_string(),
            ]
        })
        .collect();
    write_csv(&ctx.out, "equilibria.csv", "support,n0,n2,norm_sq,stable,hyperbolic", &rows)?;
    let worst = records.iter().map(|r| equilibrium_residual(r, alpha)).fold(0.0, f64::max);
    if worst > 1e-12 {
        return Err(Failure::Assertion(format!("equilibrium residual {worst:e} exceeds 1e-12")));
    }
    if d <= MAX_LINEARIZATION_D {
        for r in &records {
            if spectrum_verdict(&linearization_spectrum(r, alpha, d)?) != r.stability {
                return Err(Failure::Assertion(format!(
                    "spectrum of support {} disagrees with its stability verdict",
                    r.support_label()
                )));
            }
        }
    }
    Ok(())
}

fn gradient_run(ctx: &Context) -> Result<(), Failure> {
    let s = &ctx.settings;
    let alpha: f64 = s.get("alpha")?;
    let mut config = GradientConfig::new(reduced_d(s, alpha)?, s.get("T")?, s.get("ensemble")?);
    config.h = s.get("h")?;
    config.membership_tol = s.get("membership_tol")?;
    config.base_seed = ctx.seed;
    let report = gradient_convergence_experiment(alpha, &config)?;
    let rows: Vec<Vec<String>> = report
        .members
        .iter()
        .map(|m| {
            vec![
                m.seed.to_string(),
                report.equilibria[m.nearest].support_label(),
                num(m.distance),
                m.converged.to_string(),
                num(m.max_increase),
                num(m.max_rate_error),
            ]
        })
        .collect();
    write_csv(
        &ctx.out,
        "gradient.csv",
        "seed,nearest_support,distance,converged,max_increase,max_rate_error",
        &rows,
    )?;
    let unresolved = report.unresolved().count();
    let nonmonotone = report.members.iter().filter(|m| !m.is_monotone(config.monotone_tol)).count();
    let rate_misses = report.members.iter().filter(|m| m.max_rate_error > config.rate_tol).count();
    write_summary(
        &ctx.out,
        &[
            ("members".into(), report.members.len().to_string()),
            ("unresolved".into(), unresolved.to_string()),
            ("nonmonotone".into(), nonmonotone.to_string()),
            ("rate_mismatches".into(), rate_misses.to_string()),
        ],
    )?;
    if unresolved > 0 {
        log::warn!("{unresolved} member(s) ended away from every equilibrium torus");
    }
    if nonmonotone + rate_misses > 0 {
        return Err(Failure::Assertion(format!(
            "{nonmonotone} nonmonotone member(s), {rate_misses} dL/dt mismatch(es)"
        )));
    }
    Ok(())
}

fn wave(ctx: &Context) -> Result<(), Failure> {
    let s = &ctx.settings;
    let a: f64 = s.get("a")?;
    let eps_list: Vec<f64> = s.list("eps_list")?;
    let records = wave_continuation(a, &eps_list, s.get("N")?)?;
    let rows: Vec<Vec<String>> = records.iter().map(|w| vec![num(w.eps), num(w.speed), num(w.residual)]).collect();
    write_csv(&ctx.out, "wave.csv", "eps,c,residual", &rows)?;
    for (k, w) in records.iter().enumerate() {
        write_field(&ctx.out, &format!("wave_profile_{k}.csv"), &w.profile)?;
    }
    if let Some(w) = records.iter().find(|w| !(w.residual < 1e-10)) {
        return Err(Failure::Assertion(format!("residual {:e} at eps = {}", w.residual, w.eps)));
    }
    let gaps: Vec<f64> = records.windows(2).map(|p| (p[0].speed - p[1].speed).abs()).collect();
    if gaps.windows(2).any(|g| !(g[1] < g[0])) {
        return Err(Failure::Assertion(format!("speed differences {gaps:?} are not strictly decreasing")));
    }
    Ok(())
}

fn ode3_scan_cmd(ctx: &Context) -> Result<(), Failure> {
    let s = &ctx.settings;
    let config = ExponentConfig {
        h: s.get("h")?,
        horizon: s.get("horizon")?,
        renorm_every: s.get("renorm_every")?,
        transient: s.get("transient")?,
        separation: 1e-8,
    };
    let x0 = Ode3State::new(s.get("r0")?, s.get("rho0")?, s.get("eta0")?);
    let rows = ode3_scan(&s.list("beta_list")?, &s.list("gamma_list")?, &s.list("omega_list")?, x0, &config);
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![num(r.beta), num(r.gamma), num(r.omega), opt_num(r.lambda1)])
        .collect();
    write_csv(&ctx.out, "ode3.csv", "beta,gamma,omega,lambda1", &table)?;
    Ok(())
}

fn hd_check(ctx: &Context) -> Result<(), Failure> {
    let s = &ctx.settings;
    let b = beta(s)?;
    let tol: f64 = s.get("tol")?;
    let mut config = HdConfig::new(s.get("D")?, s.get("T")?);
    config.h = s.get("h")?;
    config.seed = ctx.seed;
    let report = hd_invariance_check(b, s.get("omega")?, &config)?;
    write_csv(
        &ctx.out,
        "hd.csv",
        "beta_re,beta_im,D,leakage,decayed_max",
        &[vec![num(b.re), num(b.im), report.d.to_string(), num(report.leakage), num(report.decayed_max)]],
    )?;
    if report.leakage != 0.0 {
        return Err(Failure::Assertion(format!("leakage {:e} out of H_D", report.leakage)));
    }
    if !(report.decayed_max <= tol) {
        return Err(Failure::Assertion(format!("high modes at {:e} > {tol:e}", report.decayed_max)));
    }
    Ok(())
}
