//! `simulate` and `existence-time`: initial data, theory constants, a run
//! with the a-priori monitor, and the files they write.

use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use qglab::besov::{besov_norm, BesovIndex};
use qglab::ensemble::{Ensemble, SpectrumShape};
use qglab::io::save_field;
use qglab::littlewood_paley::make_family;
use qglab::solver::{run, Integrator, SolverConfig, State};
use qglab::spectral::{DealiasRule, GridSpec, RealField};
use qglab::wellposedness::{default_constants, existence_time, AprioriLedger, ExistenceTime, ExistenceTimeConfig, Verdict};

use crate::config::{num, Config};
use crate::error::{setup, CliError};

pub const FORMAT_VERSION: u32 = 1;

fn grid_and_init_defaults() -> Vec<(&'static str, String)> {
    [
        ("grid.n", "64"),
        ("grid.period", "6.283185307179586"),
        ("init.source", "random"),
        ("init.seed", "1"),
        ("init.member", "0"),
        ("init.shape", "decaying"),
        ("init.k_min", "1"),
        ("init.k_max", "8"),
        ("init.pattern", "cosine"),
        ("init.kx", "1"),
        ("init.ky", "0"),
        ("init.file", ""),
        ("init.norm", "linf"),
        ("init.amplitude", "1"),
        ("solver.alpha", "0.5"),
        ("solver.kappa", "0.1"),
        ("theory.p", "2"),
        ("theory.q", "2"),
        ("theory.c_p", "auto"),
        ("theory.c_small", "auto"),
    ]
    .into_iter()
    .map(|(k, v)| (k, v.to_string()))
    .collect()
}

pub fn simulate_defaults() -> Vec<(&'static str, String)> {
    let mut d = grid_and_init_defaults();
    d.extend(
        [
            ("solver.dt", "auto"),
            ("solver.t_end", "1"),
            ("solver.integrator", "ifrk4"),
            ("solver.dealias", "two-thirds"),
            ("solver.nonlinear", "true"),
            ("output.stride", "1"),
            ("output.snapshot_every", "0"),
            ("output.snapshot_format", "bin"),
            ("monitor.enabled", "true"),
            ("theory.c1", "auto"),
        ]
        .into_iter()
        .map(|(k, v)| (k, v.to_string())),
    );
    d
}

pub fn existence_defaults() -> Vec<(&'static str, String)> {
    grid_and_init_defaults()
}

fn shape(s: &str) -> Option<SpectrumShape> {
    match s {
        "flat" => Some(SpectrumShape::Flat),
        "decaying" => Some(SpectrumShape::Decaying),
        "mixed" => Some(SpectrumShape::Mixed),
        _ => s.strip_prefix("block:").and_then(|j| j.parse().ok()).map(SpectrumShape::SingleBlock),
    }
}

pub fn grid(cfg: &Config) -> Result<GridSpec, CliError> {
    GridSpec::new(cfg.usize("grid.n")?, cfg.f64("grid.period")?).map_err(setup)
}

/// Builds `θ_0` from the `init.*` keys and rescales it to `init.amplitude`
/// in `init.norm` (`none` keeps the raw field).
pub fn initial_data(cfg: &Config, grid: GridSpec) -> Result<RealField, CliError> {
    let raw = match cfg.str("init.source") {
        "zero" => RealField::zeros(grid),
        "random" => {
            let member = cfg.usize("init.member")?;
            let shape = shape(cfg.str("init.shape")).ok_or_else(|| {
                CliError::Usage(format!("init.shape = '{}': expected flat | decaying | mixed | block:J", cfg.str("init.shape")))
            })?;
            let ens = Ensemble::new(cfg.get("init.seed", "an unsigned integer")?, member + 1, cfg.f64("init.k_min")?, cfg.f64("init.k_max")?, shape)
                .map_err(setup)?;
            ens.member(grid, member).map_err(setup)?.to_real()
        }
        "pattern" => match cfg.str("init.pattern") {
            "zero" => RealField::zeros(grid),
            "cosine" => {
                let (kx, ky) = (cfg.f64("init.kx")?, cfg.f64("init.ky")?);
                let w = grid.wave_scale();
                RealField::from_fn(grid, |x, y| (w * (kx * x + ky * y)).cos()).map_err(setup)?
            }
            other => return Err(CliError::Usage(format!("init.pattern = '{other}': expected zero | cosine"))),
        },
        "file" => {
            let path = cfg.str("init.file");
            let f = qglab::io::load_field(Path::new(path)).map_err(|e| CliError::Usage(format!("init.file = '{path}': {e}")))?;
            if f.grid() != &grid {
                return Err(CliError::Usage(format!(
                    "init.file holds a {n}x{n} field of period {}, config asks for n = {} period {}",
                    f.grid().period(),
                    grid.n(),
                    grid.period(),
                    n = f.grid().n()
                )));
            }
            f
        }
        other => return Err(CliError::Usage(format!("init.source = '{other}': expected random | pattern | file | zero"))),
    };
    let amp = cfg.f64("init.amplitude")?;
    let current = match cfg.str("init.norm") {
        "none" => return Ok(raw),
        "linf" => raw.max_abs(),
        "l2" => raw.forward().l2_norm(),
        "besov" => {
            let (alpha, p, q) = (cfg.f64("solver.alpha")?, cfg.f64("theory.p")?, cfg.f64("theory.q")?);
            let sigma = 2.0 / p + 1.0 - 2.0 * alpha;
            let idx = BesovIndex::homogeneous(sigma, p, q).map_err(setup)?;
            besov_norm(&raw.forward(), idx, &make_family(grid).map_err(setup)?).map_err(setup)?
        }
        other => return Err(CliError::Usage(format!("init.norm = '{other}': expected none | linf | l2 | besov"))),
    };
    Ok(if current > 0.0 { raw.scaled(amp / current) } else { raw })
}

/// Constants of the small-data theory from `theory.*`; `auto` wires them to
/// the empirical defaults, which are deterministic, so `auto` stays in the
/// echo and the values land in the outputs. `Err` when the theory does not
/// apply to the configured `(α, κ)`.
pub struct Theory {
    pub cfg: ExistenceTimeConfig,
    pub c1: f64,
    pub source: String,
}

pub fn theory(cfg: &Config, with_c1: bool) -> Result<Result<Theory, String>, CliError> {
    let (alpha, kappa) = (cfg.f64("solver.alpha")?, cfg.f64("solver.kappa")?);
    let (p, q) = (cfg.f64("theory.p")?, cfg.f64("theory.q")?);
    if !(alpha > 0.0 && alpha <= 0.5) {
        return Ok(Err(format!("alpha = {alpha} is outside (0, 1/2]")));
    }
    if !(kappa > 0.0) {
        return Ok(Err("kappa = 0".into()));
    }
    let c_p = cfg.auto_f64("theory.c_p")?;
    let c_small = cfg.auto_f64("theory.c_small")?;
    let c1 = if with_c1 { cfg.auto_f64("theory.c1")? } else { Some(0.0) };
    let mut source = "config".to_string();
    let (c_p, c_small, c1) = match (c_p, c_small, c1) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => {
            let d = default_constants(alpha, p, q).map_err(setup)?;
            source = d.source.clone();
            (c_p.unwrap_or(d.c_p), c_small.unwrap_or(d.c_small), c1.unwrap_or(d.c1))
        }
    };
    let ecfg = ExistenceTimeConfig { alpha, p, q, kappa, c_p, c_small };
    ecfg.validate().map_err(setup)?;
    Ok(Ok(Theory { cfg: ecfg, c1, source }))
}

pub fn existence_json(t: &ExistenceTime, th: &Theory) -> Value {
    json!({
        "format_version": FORMAT_VERSION,
        "sigma": t.sigma,
        "norm": t.norm,
        "threshold": t.threshold,
        "T0": if t.global { json!("inf") } else { json!(t.t0) },
        "global": t.global,
        "branch": if t.global { "smallness" } else { "bisection" },
        "constants": {
            "alpha": th.cfg.alpha,
            "p": th.cfg.p,
            "q": th.cfg.q,
            "kappa": th.cfg.kappa,
            "c_p": th.cfg.c_p,
            "c_small": th.cfg.c_small,
            "source": th.source,
        },
    })
}

pub fn write_echo(out: &Path, cfg: &Config) -> Result<(), CliError> {
    fs::write(out.join("config.echo"), cfg.echo())?;
    Ok(())
}

/// `existence-time`: prints and writes `existence_time.json`.
pub fn existence(cfg: Config, out: &Path) -> Result<String, CliError> {
    let grid = grid(&cfg)?;
    let theta0 = initial_data(&cfg, grid)?.forward();
    let th = theory(&cfg, false)?.map_err(|why| CliError::Usage(format!("existence time undefined: {why}")))?;
    let fam = make_family(grid).map_err(setup)?;
    let t = existence_time(&theta0, &th.cfg, &fam).map_err(setup)?;
    let text = serde_json::to_string_pretty(&existence_json(&t, &th))? + "\n";
    fs::create_dir_all(out)?;
    fs::write(out.join("existence_time.json"), &text)?;
    write_echo(out, &cfg)?;
    Ok(text)
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub completed: bool,
    pub steps: usize,
    pub final_time: f64,
    pub abort: Option<String>,
    /// `None` when the theory does not apply; `Some(inf)` on the global branch.
    pub t0: Option<f64>,
    pub max_apriori_ratio: Option<f64>,
}

fn verdict_json(v: &Verdict) -> Value {
    json!({
        "passed": v.passed,
        "max_ratio": v.max_ratio,
        "max_ratio_t": v.max_ratio_t,
        "violation": v.violation.map(|(t, r)| json!({"t": t, "ratio": r})),
        "c1": v.c1,
        "kappa": v.kappa,
        "initial_norm": v.initial_norm,
    })
}

/// Runs one simulation into `out` (trajectory, metadata, echo, snapshots).
pub fn simulate(mut cfg: Config, out: &Path) -> Result<RunSummary, CliError> {
    let grid = grid(&cfg)?;
    let theta0 = initial_data(&cfg, grid)?;
    let spec0 = theta0.forward();
    let (alpha, kappa) = (cfg.f64("solver.alpha")?, cfg.f64("solver.kappa")?);
    let dt0 = cfg.auto_f64("solver.dt")?.unwrap_or(1.0);
    let mut scfg = SolverConfig::new(alpha, kappa, grid, dt0, cfg.f64("solver.t_end")?).map_err(setup)?;
    scfg.integrator = cfg.parsed::<Integrator>("solver.integrator")?;
    scfg.dealias = cfg.parsed::<DealiasRule>("solver.dealias")?;
    scfg.nonlinear = cfg.bool("solver.nonlinear")?;
    scfg.record_stride = cfg.usize("output.stride")?;
    if cfg.str("solver.dt") == "auto" {
        scfg.dt = scfg.suggested_dt(&spec0);
        cfg.set_resolved("solver.dt", num(scfg.dt));
    }
    scfg.validate().map_err(setup)?;
    let snap_every = cfg.usize("output.snapshot_every")?;
    let snap_ext = match cfg.str("output.snapshot_format") {
        "bin" => "bin",
        "csv" => "csv",
        other => return Err(CliError::Usage(format!("output.snapshot_format = '{other}': expected bin | csv"))),
    };

    let theory = if cfg.bool("monitor.enabled")? { theory(&cfg, true)? } else { Err("monitor disabled".to_string()) };
    let fam = make_family(grid).map_err(setup)?;
    let (existence, mut ledger) = match &theory {
        Ok(th) => {
            let t = existence_time(&spec0, &th.cfg, &fam).map_err(setup)?;
            let ledger = AprioriLedger::new(alpha, th.cfg.p, th.cfg.q, kappa, th.c1, fam.clone()).map_err(setup)?;
            (Some(t), Some(ledger))
        }
        Err(_) => (None, None),
    };

    fs::create_dir_all(out)?;
    let snap_dir = out.join("snapshots");
    if snap_every > 0 {
        fs::create_dir_all(&snap_dir)?;
    }
    let n_steps = scfg.step_sizes().len();
    let mut snapshots = |s: &State| -> qglab::Result<()> {
        if snap_every > 0 && (s.step.is_multiple_of(snap_every) || s.step == n_steps) {
            save_field(&snap_dir.join(format!("snap_{:06}.{snap_ext}", s.step)), &s.theta.to_real())?;
        }
        Ok(())
    };
    let outcome = match &mut ledger {
        Some(l) => run(&theta0, &scfg, &mut [l, &mut snapshots])?,
        None => run(&theta0, &scfg, &mut [&mut snapshots])?,
    };

    fs::write(out.join("trajectory.csv"), outcome.trajectory.to_csv())?;
    let abort = outcome.abort.map(|a| format!("{:?} at t = {} (step {})", a.reason, a.t, a.step));
    let verdict = ledger.as_ref().map(|l| l.verdict());
    let constants = match &theory {
        Ok(th) => json!({"c_p": th.cfg.c_p, "c_small": th.cfg.c_small, "c1": th.c1, "source": th.source}),
        Err(why) => json!({"skipped": why}),
    };
    let meta = json!({
        "format_version": FORMAT_VERSION,
        "config": cfg.to_map(),
        "seed": cfg.str("init.seed"),
        "steps": outcome.final_state.step,
        "final_time": outcome.final_state.t,
        "completed": outcome.completed(),
        // the run stops at the last healthy state; the failing step is the next one
        "abort": outcome.abort.map(|a| json!({"reason": format!("{:?}", a.reason), "last_good_t": a.t, "last_good_step": a.step})),
        "existence_time": match (&existence, &theory) {
            (Some(t), Ok(th)) => existence_json(t, th),
            _ => Value::Null,
        },
        "verdict": verdict.as_ref().map(verdict_json),
        "constants": constants,
    });
    fs::write(out.join("metadata.json"), serde_json::to_string_pretty(&meta)? + "\n")?;
    write_echo(out, &cfg)?;
    Ok(RunSummary {
        completed: outcome.completed(),
        steps: outcome.final_state.step,
        final_time: outcome.final_state.t,
        abort,
        t0: existence.map(|t| t.t0),
        max_apriori_ratio: verdict.map(|v| v.max_ratio),
    })
}
