//! `fama`: batch front end for the slow FAMA port-selection simulator.

mod config;
mod error;
mod manifest;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fama_core::harness::{bounds_table, run_experiment, write_bounds_csv, write_results_csv};
use fama_core::selection::{predicted_mult_count, Method, SinrMode};
use fama_core::specfun::QuadratureSpec;
use fama_core::validate::{run_validation, ValidationHooks};
use toml::Value;

use config::{load_file, resolve, Layer};
use error::CliError;
use manifest::RunManifest;

/// Environment variable naming the default output directory.
const OUT_DIR_ENV: &str = "FAMA_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "fama-out";

#[derive(Parser)]
#[command(name = "fama", version, about = "Port selection and SER simulation for multi-port slow FAMA")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo SER experiment and write results.csv.
    Simulate(SimulateArgs),
    /// Evaluate the ASEP bounds and write bounds.csv.
    Bounds(BoundsArgs),
    /// Run the built-in oracle suite.
    Validate(ValidateArgs),
    /// Print closed-form multiplication counts.
    Complexity(ComplexityArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// TOML config with [grid], [channel], [system], [selection], [sweep], [csi], [run], [output].
    #[arg(long)]
    config: Option<PathBuf>,
    /// 6ghz-sparse, 6ghz-compact, 26ghz-sparse or 26ghz-compact.
    #[arg(long)]
    preset: Option<String>,
    /// Acknowledge the runtime of the compact presets.
    #[arg(long)]
    allow_compact: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: $FAMA_OUT_DIR, then ./fama-out).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Comma-separated method names.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    nrf: Option<usize>,
    #[arg(long)]
    snr_db: Option<f64>,
    #[arg(long)]
    users: Option<usize>,
    /// perfect or estimated:T
    #[arg(long)]
    csi: Option<String>,
    /// direct, successive or auto
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    trials_min: Option<u64>,
    #[arg(long)]
    trials_max: Option<u64>,
}

#[derive(Args)]
struct BoundsArgs {
    /// Comma-separated user counts.
    #[arg(long, value_delimiter = ',', required = true)]
    users: Vec<usize>,
    #[arg(long)]
    n_star: usize,
    #[arg(long)]
    ports: usize,
    /// QAM order.
    #[arg(long, default_value_t = 4)]
    m: usize,
    #[arg(long, default_value_t = 1e-10)]
    abs_tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    rel_tol: f64,
    #[arg(long, default_value_t = 2000)]
    max_subdivisions: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct ComplexityArgs {
    #[arg(long)]
    ports: usize,
    #[arg(long)]
    nrf: usize,
    #[arg(long)]
    users: usize,
    /// direct, successive, or both when omitted.
    #[arg(long)]
    mode: Option<String>,
}

fn out_dir(flag: Option<PathBuf>, configured: Option<PathBuf>) -> PathBuf {
    flag.or(configured)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Output(format!("cannot create '{}': {e}", dir.display())))
}

fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    let file = args.config.as_deref().map(load_file).transpose()?;
    let mut over = Layer::new();
    let mut set = |k: &str, v: Value| {
        over.insert(k.to_string(), v);
    };
    if let Some(s) = args.seed {
        set("run.seed", Value::Integer(s as i64));
    }
    if let Some(w) = args.workers {
        set("run.workers", Value::Integer(w as i64));
    }
    if let Some(m) = &args.method {
        set("selection.methods", Value::String(m.clone()));
    }
    if let Some(n) = args.nrf {
        set("system.n_rf", Value::Integer(n as i64));
    }
    if let Some(s) = args.snr_db {
        set("system.snr_db", Value::Float(s));
    }
    if let Some(u) = args.users {
        set("system.users", Value::Integer(u as i64));
    }
    if let Some(c) = &args.csi {
        set("csi.mode", Value::String(c.clone()));
    }
    if let Some(m) = &args.mode {
        set("selection.mode", Value::String(m.clone()));
    }
    if let Some(t) = args.trials_min {
        set("run.trials_min", Value::Integer(t as i64));
    }
    if let Some(t) = args.trials_max {
        set("run.trials_max", Value::Integer(t as i64));
    }
    let resolved = resolve(file, over, args.preset.as_deref(), args.allow_compact)?;
    let dir = out_dir(args.out, resolved.out_dir.clone());
    create_dir(&dir)?;

    let rows = run_experiment(&resolved.config)?;
    write_results_csv(&rows, BufWriter::new(File::create(dir.join("results.csv"))?))?;

    let mut manifest = RunManifest::new("simulate", &dir);
    manifest.config_path = args.config.map(|p| p.display().to_string());
    manifest.master_seed = Some(resolved.config.master_seed);
    manifest.preset = resolved.preset;
    manifest.settings = resolved.settings;
    manifest.write(&dir)?;

    println!(
        "{:>8} {:>6} {:>11} {:>10} {:>10} {:>8}",
        resolved.config.sweep_variable.name(),
        "method",
        "ser",
        "stderr",
        "sinr_db",
        "trials"
    );
    for r in &rows {
        println!(
            "{:>8} {:>6} {:>11.4e} {:>10.2e} {:>10.3} {:>8}{}",
            r.sweep_value,
            r.method,
            r.ser,
            r.ser_stderr,
            r.mean_sinr_db,
            r.trials,
            if r.low_confidence { "  (low confidence)" } else { "" }
        );
    }
    println!("wrote {}", dir.join("results.csv").display());
    Ok(())
}

fn bounds(args: BoundsArgs) -> Result<(), CliError> {
    let quad = QuadratureSpec::new(args.abs_tol, args.rel_tol, args.max_subdivisions)?;
    let rows = bounds_table(&args.users, args.n_star, args.ports, args.m, &quad)?;
    let dir = out_dir(args.out, None);
    create_dir(&dir)?;
    write_bounds_csv(&rows, BufWriter::new(File::create(dir.join("bounds.csv"))?))?;
    let mut manifest = RunManifest::new("bounds", &dir);
    manifest.settings = [
        ("bounds.users", Value::Array(args.users.iter().map(|&u| Value::Integer(u as i64)).collect())),
        ("bounds.n_star", Value::Integer(args.n_star as i64)),
        ("bounds.ports", Value::Integer(args.ports as i64)),
        ("bounds.m", Value::Integer(args.m as i64)),
        ("quadrature.abs_tol", Value::Float(args.abs_tol)),
        ("quadrature.rel_tol", Value::Float(args.rel_tol)),
        ("quadrature.max_subdivisions", Value::Integer(args.max_subdivisions as i64)),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    manifest.write(&dir)?;

    println!("{:>4} {:>6} {:>6} {:>4} {:>14} {:>14}", "u", "n_star", "ports", "m", "asep_lower", "asep_upper");
    for r in &rows {
        println!(
            "{:>4} {:>6} {:>6} {:>4} {:>14.6e} {:>14.6e}{}",
            r.u,
            r.n_star,
            r.n_ports,
            r.m,
            r.asep_lower,
            r.asep_upper,
            r.note.as_deref().map(|n| format!("  ({n})")).unwrap_or_default()
        );
    }
    println!("wrote {}", dir.join("bounds.csv").display());
    Ok(())
}

fn validate(args: ValidateArgs) -> Result<(), CliError> {
    let report = run_validation(args.seed, &ValidationHooks::default());
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if report.all_passed() {
        Ok(())
    } else {
        Err(CliError::ValidationFailed(report.failures()))
    }
}

fn complexity(args: ComplexityArgs) -> Result<(), CliError> {
    let modes = match args.mode.as_deref() {
        None => vec![SinrMode::Direct, SinrMode::Successive],
        Some(m) => vec![m.parse::<SinrMode>()?],
    };
    let auto = SinrMode::auto(args.nrf, args.users);
    println!(
        "N = {}, N_RF = {}, U = {} (cheaper EPS mode: {auto})",
        args.ports, args.nrf, args.users
    );
    println!("{:>6} {:>11} {:>22}", "method", "mode", "complex mults");
    for method in [Method::Ss, Method::Eps, Method::Ips, Method::Dps] {
        for &mode in &modes {
            let count = match predicted_mult_count(method, args.ports, args.nrf, args.users, mode) {
                Ok(c) => c.to_string(),
                Err(fama_core::Error::EnumerationTooLarge { combinations, .. }) => {
                    format!("overflow ({combinations:.3e} sets)")
                }
                Err(e) => return Err(e.into()),
            };
            println!("{:>6} {:>11} {:>22}", method.name(), mode.to_string(), count);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Bounds(a) => bounds(a),
        Command::Validate(a) => validate(a),
        Command::Complexity(a) => complexity(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
