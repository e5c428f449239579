//! `displab` command-line front-end: one subcommand per experiment, each
//! writing CSV tables and a manifest into `--out`.

mod commands;
mod config;
mod output;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches};

use commands::{Context, Failure, COMMANDS};
use config::{read_config, Settings};
use output::Manifest;

const USAGE_ERROR: u8 = 64;

fn cli() -> clap::Command {
    let mut root = clap::Command::new("displab")
        .about("Large-dispersion averaging experiments for periodic GL and KS equations")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg_required_else_help(true);
    for cmd in COMMANDS {
        let mut sub = clap::Command::new(cmd.name)
            .about(cmd.about)
            .arg(Arg::new("config").long("config").value_name("FILE").help("key = value settings file"))
            .arg(
                Arg::new("out")
                    .long("out")
                    .value_name("DIR")
                    .default_value(".")
                    .help("output directory"),
            )
            .arg(
                Arg::new("threads")
                    .long("threads")
                    .value_name("N")
                    .value_parser(clap::value_parser!(usize))
                    .help("worker threads (DISPLAB_THREADS overrides)"),
            );
        for k in cmd.keys {
            let help = match k.default {
                Some(d) => format!("{} [default: {d}]", k.help),
                None => k.help.to_string(),
            };
            sub = sub.arg(Arg::new(k.name).long(k.name).value_name("VALUE").action(ArgAction::Set).help(help));
        }
        root = root.subcommand(sub);
    }
    root
}

fn thread_count(matches: &ArgMatches) -> Result<Option<usize>, Failure> {
    if let Ok(v) = std::env::var("DISPLAB_THREADS") {
        let n = v
            .trim()
            .parse::<usize>()
            .map_err(|_| Failure::Config(config::ConfigError::Invalid(format!("DISPLAB_THREADS=`{v}` is not a count"))))?;
        return Ok(Some(n));
    }
    Ok(matches.get_one::<usize>("threads").copied())
}

fn run(name: &str, matches: &ArgMatches) -> Result<(), Failure> {
    let cmd = COMMANDS.iter().find(|c| c.name == name).expect("registered subcommand");
    if let Some(n) = thread_count(matches)?.filter(|&n| n > 0) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool already initialised: {e}");
        }
    }
    let config_path = matches.get_one::<String>("config").map(PathBuf::from);
    let file = match &config_path {
        Some(p) => read_config(p)?,
        None => BTreeMap::new(),
    };
    let flags: BTreeMap<String, String> = cmd
        .keys
        .iter()
        .filter_map(|k| matches.get_one::<String>(k.name).map(|v| (k.name.to_string(), v.clone())))
        .collect();
    let settings = Settings::resolve(cmd.keys, &file, &flags)?;
    let seed: u64 = settings.get("seed")?;
    let out = PathBuf::from(matches.get_one::<String>("out").expect("has default"));
    let canonical = settings.canonical();
    let manifest = Manifest {
        subcommand: name,
        config: config_path.as_deref(),
        out: &out,
        seed,
        settings: &canonical,
    };
    manifest.write()?;
    log::info!("{name} run {} -> {}", manifest.id(), out.display());
    for (k, v) in settings.iter() {
        log::debug!("  {k} = {v}");
    }
    (cmd.run)(&Context { settings, out, seed })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(USAGE_ERROR) } else { ExitCode::SUCCESS };
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand required");
    match run(name, sub) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("displab {name}: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
