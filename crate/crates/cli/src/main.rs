//! `qglab`: verification suites, simulations, existence times and sweeps.
//!
//! Exit codes: 0 success, 1 invariant or run failure, 2 usage or config
//! error, 3 numerical abort.

mod config;
mod error;
mod simulate;
mod sweep;
mod verify;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{gather, Config};
use error::CliError;

#[derive(Parser)]
#[command(name = "qglab", version, about = "Dissipative quasi-geostrophic solver and Besov-space inequality lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an inequality / identity suite and write report.json + report.csv.
    Verify(VerifyArgs),
    /// Integrate one initial datum; writes trajectory.csv and metadata.json.
    Simulate(SimulateArgs),
    /// Guaranteed existence time of the small-data theory for θ₀.
    ExistenceTime(ExistenceArgs),
    /// Simulate over a grid of (alpha, kappa, amplitude, n).
    Sweep(SweepArgs),
    /// Dump the radial profiles χ and φ of the dyadic partition.
    Profiles(ProfilesArgs),
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` config file (an echoed config works).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override any key, e.g. `--set solver.alpha=0.25`. Applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = "qglab-out")]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// bernstein | positivity | dissipation | composition | product | commutator | lp-identities
    suite: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    count: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Comma-separated exponents.
    #[arg(long)]
    p: Option<String>,
    /// Comma-separated derivative orders.
    #[arg(long)]
    alpha: Option<String>,
    /// Comma-separated regularities.
    #[arg(long)]
    s: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    j_min: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    j_max: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    kappa: Option<String>,
    /// Time step, or `auto`.
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    t_end: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    amplitude: Option<String>,
    /// random | pattern | file | zero
    #[arg(long)]
    init: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ExistenceArgs {
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    kappa: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    amplitude: Option<String>,
    #[arg(long)]
    init: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SweepArgs {
    /// Worker threads; results do not depend on it.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Comma-separated list.
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    kappa: Option<String>,
    #[arg(long)]
    amplitude: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ProfilesArgs {
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    r_max: Option<String>,
    #[command(flatten)]
    common: Common,
}

fn load(
    command: &str,
    defaults: &[(&str, String)],
    common: &Common,
    flags: Vec<(&str, Option<String>, &str)>,
) -> Result<Config, CliError> {
    let layers = gather(command, common.config.as_deref(), flags, &common.set)?;
    Config::resolve(command, defaults, &layers)
}

fn cmd_verify(a: VerifyArgs) -> Result<(), CliError> {
    let flags = vec![
        ("verify.n", a.n, "--n"),
        ("verify.count", a.count, "--count"),
        ("verify.seed", a.seed, "--seed"),
        ("verify.p", a.p, "--p"),
        ("verify.alpha", a.alpha, "--alpha"),
        ("verify.s", a.s, "--s"),
        ("verify.q", a.q, "--q"),
        ("verify.j_min", a.j_min, "--j-min"),
        ("verify.j_max", a.j_max, "--j-max"),
    ];
    let layers = gather("verify", a.common.config.as_deref(), flags, &a.common.set)?;
    let cfg = verify::resolve(a.suite.as_deref(), layers)?;
    let report = verify::verify(&cfg, &a.common.out)?;
    println!(
        "{}: {} samples, c_emp = {:.6e}, C_emp = {:.6e}, {}",
        report.name,
        report.samples.len(),
        report.c_emp,
        report.c_emp_upper,
        if report.passed() { "PASS" } else { "FAIL" }
    );
    if report.passed() {
        return Ok(());
    }
    for c in report.checks.iter().filter(|c| !c.passed) {
        eprintln!("failed check {}: {}", c.name, c.detail);
    }
    Err(CliError::Failure(format!("{} suite failed", report.name)))
}

fn sim_flags(a: &SimulateArgs) -> Vec<(&'static str, Option<String>, &'static str)> {
    vec![
        ("grid.n", a.n.clone(), "--n"),
        ("solver.alpha", a.alpha.clone(), "--alpha"),
        ("solver.kappa", a.kappa.clone(), "--kappa"),
        ("solver.dt", a.dt.clone(), "--dt"),
        ("solver.t_end", a.t_end.clone(), "--t-end"),
        ("init.seed", a.seed.clone(), "--seed"),
        ("init.amplitude", a.amplitude.clone(), "--amplitude"),
        ("init.source", a.init.clone(), "--init"),
    ]
}

fn cmd_simulate(a: SimulateArgs) -> Result<(), CliError> {
    let cfg = load("simulate", &simulate::simulate_defaults(), &a.common, sim_flags(&a))?;
    let s = simulate::simulate(cfg, &a.common.out)?;
    match &s.abort {
        None => {
            println!("completed {} steps to t = {}", s.steps, s.final_time);
            Ok(())
        }
        Some(why) => Err(CliError::Abort(format!("run aborted: {why}"))),
    }
}

fn cmd_existence(a: ExistenceArgs) -> Result<(), CliError> {
    let flags = vec![
        ("grid.n", a.n, "--n"),
        ("solver.alpha", a.alpha, "--alpha"),
        ("solver.kappa", a.kappa, "--kappa"),
        ("init.seed", a.seed, "--seed"),
        ("init.amplitude", a.amplitude, "--amplitude"),
        ("init.source", a.init, "--init"),
        ("theory.p", a.p, "--p"),
        ("theory.q", a.q, "--q"),
    ];
    let cfg = load("existence-time", &simulate::existence_defaults(), &a.common, flags)?;
    print!("{}", simulate::existence(cfg, &a.common.out)?);
    Ok(())
}

fn cmd_sweep(a: SweepArgs) -> Result<(), CliError> {
    let flags = vec![
        ("sweep.alpha", a.alpha, "--alpha"),
        ("sweep.kappa", a.kappa, "--kappa"),
        ("sweep.amplitude", a.amplitude, "--amplitude"),
        ("sweep.n", a.n, "--n"),
    ];
    let cfg = load("sweep", &sweep::defaults(), &a.common, flags)?;
    let r = sweep::sweep(&cfg, &a.common.out, a.jobs)?;
    print!("{}", r.summary);
    if r.failures.is_empty() {
        return Ok(());
    }
    for f in &r.failures {
        eprintln!("{f}");
    }
    Err(CliError::Failure(format!("{} cell(s) failed", r.failures.len())))
}

fn cmd_profiles(a: ProfilesArgs) -> Result<(), CliError> {
    let defaults = vec![("profiles.samples", "401".to_string()), ("profiles.r_max", "4".to_string())];
    let flags = vec![("profiles.samples", a.samples, "--samples"), ("profiles.r_max", a.r_max, "--r-max")];
    let cfg = load("profiles", &defaults, &a.common, flags)?;
    let (samples, r_max) = (cfg.usize("profiles.samples")?, cfg.f64("profiles.r_max")?);
    if samples < 2 || r_max <= 0.0 {
        return Err(CliError::Usage("profiles need samples >= 2 and r_max > 0".into()));
    }
    let out: &Path = &a.common.out;
    fs::create_dir_all(out)?;
    fs::write(out.join("profiles.csv"), qglab::littlewood_paley::DyadicFamily::profile_csv(samples, r_max))?;
    simulate::write_echo(out, &cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(a) => cmd_verify(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::ExistenceTime(a) => cmd_existence(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Profiles(a) => cmd_profiles(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qglab: {e}");
            ExitCode::from(e.code())
        }
    }
}
