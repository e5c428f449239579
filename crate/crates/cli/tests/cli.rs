use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn displab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_displab"))
        .args(args)
        .env_remove("DISPLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn out_arg(dir: &Path) -> String {
    dir.display().to_string()
}

#[test]
fn equilibria_lists_the_feasible_supports() {
    let dir = tempfile::tempdir().unwrap();
    let out = displab(&["equilibria", "--alpha", "1.5", "--D", "2", "--out", &out_arg(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(dir.path(), "equilibria.csv");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "support,n0,n2,norm_sq,stable,hyperbolic");
    assert_eq!(lines.len(), 1 + 5);
    let stable: Vec<&str> = lines[1..].iter().filter(|l| l.contains(",true,")).copied().collect();
    assert_eq!(stable.len(), 1);
    assert!(stable[0].starts_with("{0},"));
}

#[test]
fn manifest_records_settings_and_a_stable_run_id() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        assert!(displab(&["equilibria", "--seed", "5", "--out", &out_arg(dir.path())]).status.success());
    }
    let (ma, mb) = (read(a.path(), "manifest.txt"), read(b.path(), "manifest.txt"));
    let id = |m: &str| m.lines().find(|l| l.starts_with("run_id=")).unwrap().to_string();
    assert_eq!(id(&ma), id(&mb));
    assert!(ma.contains("seed=5\n"));
    assert!(ma.contains("setting.alpha=1.5\n"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# reduced system\nalpha = 5.0\nD = 1\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = displab(&[
        "equilibria",
        "--config",
        &cfg.display().to_string(),
        "--alpha",
        "1.5",
        "--out",
        &out_dir.display().to_string(),
    ]);
    assert!(out.status.success());
    let manifest = read(&out_dir, "manifest.txt");
    assert!(manifest.contains("setting.alpha=1.5\n"));
    assert!(manifest.contains("setting.D=1\n"));
    // D = 1 with α = 1.5: {}, {−1}, {0}, {1}, {−1, 1}
    assert_eq!(read(&out_dir, "equilibria.csv").lines().count(), 6);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    assert_eq!(displab(&["no-such-command"]).status.code(), Some(64));
    assert_eq!(displab(&["equilibria", "--beta", "1"]).status.code(), Some(64));
    assert_eq!(displab(&["equilibria", "--alpha", "x", "--out", &out]).status.code(), Some(64));
    assert_eq!(
        displab(&["equilibria", "--config", "/nonexistent/displab.cfg", "--out", &out]).status.code(),
        Some(66)
    );
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "unknown_key = 1\n").unwrap();
    assert_eq!(
        displab(&["equilibria", "--config", &bad.display().to_string(), "--out", &out]).status.code(),
        Some(64)
    );
    assert_eq!(displab(&["--help"]).status.code(), Some(0));
    assert_eq!(displab(&["simulate", "--help"]).status.code(), Some(0));
}

#[test]
fn zero_horizon_simulation_writes_the_initial_sample() {
    let dir = tempfile::tempdir().unwrap();
    let out = displab(&["simulate", "--model", "ks", "--L", "0", "--T", "0", "--out", &out_arg(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(dir.path(), "trajectory.csv");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines, ["t,h_norm,h1_norm,lyapunov", lines[1]]);
    let cells: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(cells[0].parse::<f64>().unwrap(), 0.0);
    assert!((cells[1].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(cells[3], "");
}

#[test]
fn simulation_snapshots_and_determinism() {
    let run = |dir: &Path| {
        let out = displab(&[
            "simulate",
            "--model",
            "gl2",
            "--frame",
            "averaged",
            "--N",
            "8",
            "--T",
            "0.5",
            "--h",
            "0.05",
            "--snapshot_every",
            "5",
            "--seed",
            "3",
            "--out",
            &out_arg(dir),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run(a.path());
    run(b.path());
    assert_eq!(read(a.path(), "trajectory.csv"), read(b.path(), "trajectory.csv"));
    let index = read(a.path(), "snapshots/index.csv");
    assert_eq!(index.lines().count(), 1 + 3);
    let snap = read(a.path(), "snapshots/snapshot_000002.csv");
    assert_eq!(snap.lines().next(), Some("n,re,im"));
    assert_eq!(snap.lines().count(), 1 + 17);
}

#[test]
fn blow_up_exits_with_three_and_keeps_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    // backward-diffusion KS with a huge step escapes immediately
    let out = displab(&[
        "simulate", "--model", "ks", "--a", "50", "--N", "16", "--h", "1", "--T", "1000", "--amplitude", "10",
        "--out", &out_arg(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(read(dir.path(), "trajectory.csv").lines().count() >= 2);
}

#[test]
fn averaging_rate_reports_first_order_slope() {
    let dir = tempfile::tempdir().unwrap();
    let out = displab(&[
        "averaging-rate", "--family", "gl1", "--N", "8", "--L_list", "20,40,80", "--out", &out_arg(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read(dir.path(), "rate.csv").lines().next(), Some("L,eps,err_h1"));
    let summary = read(dir.path(), "summary.csv");
    let slope: f64 = summary
        .lines()
        .find_map(|l| l.strip_prefix("slope,"))
        .unwrap()
        .parse()
        .unwrap();
    assert!((0.8..=1.2).contains(&slope), "slope {slope}");
    // an impossible acceptance window turns into an assertion failure
    let strict = displab(&[
        "averaging-rate", "--family", "gl1", "--N", "8", "--L_list", "20,40", "--slope_min", "3", "--slope_max", "4",
        "--out", &out_arg(dir.path()),
    ]);
    assert_eq!(strict.status.code(), Some(2));
}

#[test]
fn small_subcommand_runs_write_their_tables() {
    let cases: &[(&[&str], &str, &str)] = &[
        (&["oracle-check", "--fields", "12"], "oracle.csv", "fields,max_err_n,max_err_m,max_err_k"),
        (&["wave", "--N", "16"], "wave.csv", "eps,c,residual"),
        (
            &["ode3-scan", "--beta_list", "1.5", "--gamma_list", "0.6", "--omega_list", "0", "--horizon", "20"],
            "ode3.csv",
            "beta,gamma,omega,lambda1",
        ),
        (&["hd-check", "--T", "20"], "hd.csv", "beta_re,beta_im,D,leakage,decayed_max"),
        (
            &["gradient-run", "--ensemble", "2", "--T", "50"],
            "gradient.csv",
            "seed,nearest_support,distance,converged,max_increase,max_rate_error",
        ),
        (
            &["attractor-scan", "--L_list", "5,10", "--N", "16", "--T", "4", "--burn_in", "2", "--ensemble", "2"],
            "scan.csv",
            "L,seed,stat",
        ),
    ];
    for (args, file, header) in cases {
        let dir = tempfile::tempdir().unwrap();
        let mut full: Vec<&str> = args.to_vec();
        let out = out_arg(dir.path());
        full.extend(["--out", &out]);
        let result = displab(&full);
        assert!(result.status.success(), "{args:?}: {}", String::from_utf8_lossy(&result.stderr));
        assert_eq!(read(dir.path(), file).lines().next(), Some(*header), "{args:?}");
        assert!(dir.path().join("manifest.txt").exists());
    }
}

#[test]
fn thread_count_environment_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_displab"))
        .args(["equilibria", "--out", &out_arg(dir.path())])
        .env("DISPLAB_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    let bad = Command::new(env!("CARGO_BIN_EXE_displab"))
        .args(["equilibria", "--out", &out_arg(dir.path())])
        .env("DISPLAB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(64));
}
