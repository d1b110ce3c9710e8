use std::fs;
use std::path::Path;

use qglab::lab::{run_suite, RatioReport, Suite, SuiteConfig};

use crate::config::{Assignment, Config};
use crate::error::{setup, CliError};

fn list(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub fn defaults(suite: Suite) -> Vec<(&'static str, String)> {
    let d = SuiteConfig::defaults(suite);
    vec![
        ("verify.suite", suite.name().to_string()),
        ("verify.n", d.n.to_string()),
        ("verify.count", d.count.to_string()),
        ("verify.seed", d.seed.to_string()),
        ("verify.p", list(&d.p)),
        ("verify.alpha", list(&d.alpha)),
        ("verify.s", list(&d.s)),
        ("verify.q", d.q.to_string()),
        ("verify.j_min", d.j_min.to_string()),
        ("verify.j_max", d.j_max.to_string()),
    ]
}

/// Resolves the suite (positional argument, else `verify.suite`) and its config.
pub fn resolve(positional: Option<&str>, mut layers: Vec<Assignment>) -> Result<Config, CliError> {
    let name = positional
        .map(str::to_string)
        .or_else(|| crate::config::last_value(&layers, "verify.suite").map(str::to_string))
        .ok_or_else(|| CliError::Usage("no suite given (positional SUITE or verify.suite)".into()))?;
    let suite: Suite = name.parse().map_err(|_| {
        let all: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
        CliError::Usage(format!("unknown suite '{name}' (one of {})", all.join(", ")))
    })?;
    layers.retain(|a| a.key != "verify.suite");
    Config::resolve("verify", &defaults(suite), &layers)
}

pub fn suite_config(cfg: &Config) -> Result<(Suite, SuiteConfig), CliError> {
    let suite: Suite = cfg.parsed("verify.suite")?;
    let sc = SuiteConfig {
        n: cfg.usize("verify.n")?,
        count: cfg.usize("verify.count")?,
        seed: cfg.get("verify.seed", "an unsigned integer")?,
        p: cfg.f64_list("verify.p")?,
        alpha: cfg.f64_list("verify.alpha")?,
        s: cfg.f64_list("verify.s")?,
        q: cfg.f64("verify.q")?,
        j_min: cfg.get("verify.j_min", "an integer")?,
        j_max: cfg.get("verify.j_max", "an integer")?,
    };
    Ok((suite, sc))
}

/// Runs the suite and writes `report.json`, `report.csv` and `config.echo`.
pub fn verify(cfg: &Config, out: &Path) -> Result<RatioReport, CliError> {
    let (suite, sc) = suite_config(cfg)?;
    let report = run_suite(suite, &sc).map_err(setup)?;
    fs::create_dir_all(out)?;
    fs::write(out.join("report.json"), report.to_json()? + "\n")?;
    fs::write(out.join("report.csv"), report.to_csv())?;
    crate::simulate::write_echo(out, cfg)?;
    Ok(report)
}
