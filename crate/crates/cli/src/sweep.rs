//! Parameter sweeps: the cartesian product of `sweep.alpha × sweep.kappa ×
//! sweep.amplitude × sweep.n` (an empty list means the base value), each cell
//! run as an isolated `simulate` in `cell_NNNN/`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::config::{Config, Origin};
use crate::error::CliError;
use crate::simulate::{simulate, simulate_defaults, RunSummary};

pub fn defaults() -> Vec<(&'static str, String)> {
    let mut d = simulate_defaults();
    for k in ["sweep.alpha", "sweep.kappa", "sweep.amplitude", "sweep.n"] {
        d.push((k, String::new()));
    }
    d.push(("sweep.shared_init", "false".into()));
    d
}

/// Cell values are kept as written so a cell's echo matches a plain `simulate`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub alpha: String,
    pub kappa: String,
    pub amplitude: String,
    pub n: String,
}

pub fn cells(cfg: &Config) -> Result<Vec<Cell>, CliError> {
    let or = |key: &str, base: &str| -> Result<Vec<String>, CliError> {
        cfg.f64_list(key)?;
        Ok(if cfg.str(key).is_empty() {
            vec![cfg.str(base).to_string()]
        } else {
            cfg.str(key).split(',').map(|x| x.trim().to_string()).collect()
        })
    };
    let alphas = or("sweep.alpha", "solver.alpha")?;
    let kappas = or("sweep.kappa", "solver.kappa")?;
    let amps = or("sweep.amplitude", "init.amplitude")?;
    let ns = or("sweep.n", "grid.n")?;
    let mut out = Vec::new();
    for n in &ns {
        if n.parse::<usize>().is_err() {
            return Err(CliError::Usage(format!("sweep.n: '{n}' is not a grid size")));
        }
    }
    for alpha in &alphas {
        for kappa in &kappas {
            for amplitude in &amps {
                for n in &ns {
                    out.push(Cell {
                        index: out.len(),
                        alpha: alpha.clone(),
                        kappa: kappa.clone(),
                        amplitude: amplitude.clone(),
                        n: n.clone(),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// The `simulate` config of one cell. Cell `i` draws ensemble member `i`
/// (its own random stream) unless `sweep.shared_init` is set.
pub fn cell_config(base: &Config, cell: &Cell) -> Result<Config, CliError> {
    let mut c = base.with_command("simulate");
    c.retain(|k| !k.starts_with("sweep."));
    let o = || Origin::Flag(format!("sweep cell {}", cell.index));
    c.set("solver.alpha", cell.alpha.clone(), o());
    c.set("solver.kappa", cell.kappa.clone(), o());
    c.set("init.amplitude", cell.amplitude.clone(), o());
    c.set("grid.n", cell.n.clone(), o());
    if !base.bool("sweep.shared_init")? {
        let member = base.usize("init.member")? + cell.index;
        c.set("init.member", member.to_string(), o());
    }
    Ok(c)
}

fn opt(v: Option<f64>) -> String {
    match v {
        None => "na".into(),
        Some(x) if x.is_infinite() => "inf".into(),
        Some(x) => format!("{x:.17e}"),
    }
}

pub struct SweepResult {
    pub summary: String,
    pub failures: Vec<String>,
}

/// Runs every cell on a pool of `jobs` threads; the summary is folded in cell order.
pub fn sweep(cfg: &Config, out: &Path, jobs: usize) -> Result<SweepResult, CliError> {
    let cells = cells(cfg)?;
    let configs = cells.iter().map(|c| cell_config(cfg, c)).collect::<Result<Vec<_>, _>>()?;
    fs::create_dir_all(out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Failure(format!("thread pool: {e}")))?;
    let results: Vec<Result<RunSummary, CliError>> = pool.install(|| {
        configs
            .par_iter()
            .zip(&cells)
            .map(|(c, cell)| simulate(c.clone(), &out.join(format!("cell_{:04}", cell.index))))
            .collect()
    });
    let mut summary = String::from("# format_version: 1\ncell,alpha,kappa,amplitude,n,t0,max_apriori_ratio,status\n");
    let mut failures = Vec::new();
    for (cell, r) in cells.iter().zip(results) {
        let (t0, ratio, status) = match r {
            Ok(s) if s.completed => (s.t0, s.max_apriori_ratio, "completed".to_string()),
            Ok(s) => {
                failures.push(format!("cell {}: aborted: {}", cell.index, s.abort.clone().unwrap_or_default()));
                (s.t0, s.max_apriori_ratio, "aborted".to_string())
            }
            Err(e) => {
                failures.push(format!("cell {}: {e}", cell.index));
                (None, None, "error".to_string())
            }
        };
        let _ = writeln!(
            summary,
            "{},{},{},{},{},{},{},{status}",
            cell.index,
            cell.alpha,
            cell.kappa,
            cell.amplitude,
            cell.n,
            opt(t0),
            opt(ratio)
        );
    }
    fs::write(out.join("summary.csv"), &summary)?;
    crate::simulate::write_echo(out, cfg)?;
    Ok(SweepResult { summary, failures })
}
