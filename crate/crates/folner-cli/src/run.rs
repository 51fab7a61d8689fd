//! Command execution: build the requested objects, run the analysis, emit
//! the result, and map verdicts to exit codes (0 pass, 1 usage, 2 failed
//! test).

use std::fs;
use std::io::Write;
use std::path::Path;

use folner::{
    block_normality, classical_normality_along, export_stream, orbit_normality,
    preservation_experiment, rate_profile, simple_normality, FiniteSet, FolnerSequence,
    SubsetPredicate,
};

use crate::build::CliGroup;
use crate::config::{parse_rational, Resolved};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Command {
    Generate,
    Normality,
    Complexity,
    Experiment,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Generate => "generate",
            Command::Normality => "normality",
            Command::Complexity => "complexity",
            Command::Experiment => "experiment",
        }
    }
}

pub fn execute<G: CliGroup>(ctx: &G, cmd: Command, cfg: &Resolved) -> Result<i32, String> {
    match cmd {
        Command::Generate => run_generate(ctx, cfg),
        Command::Normality => run_normality(ctx, cfg),
        Command::Complexity => run_complexity(ctx, cfg),
        Command::Experiment => run_experiment(ctx, cfg),
    }
}

/// Write `body` to `--out` or stdout. With `--out`, `sidecar` additionally
/// records the resolved configuration next to the data file.
fn emit(cfg: &Resolved, cmd: Command, body: &[u8], sidecar: bool) -> Result<(), String> {
    match &cfg.out {
        Some(path) => {
            fs::write(path, body)
                .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
            if sidecar {
                write_sidecar(cfg, cmd, path)?;
            }
            Ok(())
        }
        None => std::io::stdout()
            .write_all(body)
            .map_err(|e| format!("cannot write to stdout: {e}")),
    }
}

fn write_sidecar(cfg: &Resolved, cmd: Command, data_path: &Path) -> Result<(), String> {
    let mut sidecar = data_path.as_os_str().to_owned();
    sidecar.push(".config");
    fs::write(&sidecar, cfg.echo(cmd.name()))
        .map_err(|e| format!("cannot write {}: {e}", Path::new(&sidecar).display()))
}

/// Default tolerance when `--tol` is absent: max(5·10⁻³, 4·√(p(1−p)/N))
/// where p is the largest reference probability among the tests and N the
/// anchor count.
fn default_tol(alphabet_size: u8, min_domain: usize, anchors: u64) -> f64 {
    let p = f64::from(alphabet_size).powi(-(min_domain.min(64) as i32));
    let n = anchors.max(1) as f64;
    (5e-3f64).max(4.0 * (p * (1.0 - p) / n).sqrt())
}

/// Anchor count for the windowed modes: |F_n ∩ A|.
fn windowed_anchor_count<G: CliGroup>(
    ctx: &G,
    a: &SubsetPredicate<G>,
    folner: &FolnerSequence<G>,
    n: u32,
) -> Result<u64, String> {
    let window = folner.at(ctx, n).map_err(|e| e.to_string())?;
    Ok(window.iter().filter(|g| a.contains(ctx, g)).count() as u64)
}

/// Selected-term count within the classical horizon (indices 0..=horizon).
fn classical_anchor_count<G: CliGroup>(
    ctx: &G,
    a: &SubsetPredicate<G>,
    horizon: u64,
) -> Result<u64, String> {
    if horizon > i64::MAX as u64 {
        return Err(format!("horizon {horizon} too large"));
    }
    let mut count = 0u64;
    for i in 0..=horizon {
        let g = ctx
            .from_index(i as i64)
            .ok_or_else(|| format!("carrier {} is not indexed by naturals", ctx.name()))?;
        if a.contains(ctx, &g) {
            count += 1;
        }
    }
    Ok(count)
}

fn min_domain_size<E: Clone + Eq + Ord + std::hash::Hash>(catalog: &[FiniteSet<E>]) -> usize {
    catalog.iter().map(|k| k.len()).min().unwrap_or(1)
}

fn require<'a, T>(opt: &'a Option<T>, what: &str) -> Result<&'a T, String> {
    opt.as_ref().ok_or_else(|| format!("missing {what}"))
}

fn run_generate<G: CliGroup>(ctx: &G, cfg: &Resolved) -> Result<i32, String> {
    let x = ctx.build_generator(cfg)?;
    let horizon = *require(&cfg.horizon, "--horizon for generate")?;
    match cfg.format.as_deref().unwrap_or("text") {
        "text" => {
            if horizon > (1 << 26) {
                return Err(format!("horizon {horizon} too large for text output"));
            }
            let values: Vec<u8> = (0..horizon).map(|i| x.eval(ctx, &ctx.enumerate(i))).collect();
            let mut body = x.alphabet().render(&values);
            body.push('\n');
            emit(cfg, Command::Generate, body.as_bytes(), true)?;
        }
        "raw" => match &cfg.out {
            Some(path) => {
                let file = fs::File::create(path)
                    .map_err(|e| format!("cannot create {}: {e}", path.display()))?;
                let mut out = std::io::BufWriter::new(file);
                export_stream(ctx, x.as_ref(), horizon, &mut out)
                    .and_then(|()| out.flush())
                    .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
                write_sidecar(cfg, Command::Generate, path)?;
            }
            None => {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                export_stream(ctx, x.as_ref(), horizon, &mut lock)
                    .map_err(|e| format!("cannot write to stdout: {e}"))?;
            }
        },
        other => return Err(format!("generate supports text or raw output, not {other}")),
    }
    Ok(0)
}

fn run_normality<G: CliGroup>(ctx: &G, cfg: &Resolved) -> Result<i32, String> {
    match cfg.format.as_deref().unwrap_or("json") {
        "json" => {}
        other => return Err(format!("normality reports are json, not {other}")),
    }
    let y = ctx.build_generator(cfg)?;
    let set_spec = require(&cfg.set, "--set for normality")?;
    let a = ctx.build_subset(set_spec, Some(&y))?;
    let report = match cfg.mode.as_str() {
        "simple" => {
            let n = *require(&cfg.n, "--n for mode simple")?;
            let folner = ctx.build_folner(cfg.folner.as_deref())?;
            let tol = match cfg.tol {
                Some(t) => t,
                None => default_tol(
                    y.alphabet().size(),
                    1,
                    windowed_anchor_count(ctx, &a, &folner, n)?,
                ),
            };
            simple_normality(ctx, &y, &a, &folner, n, tol, cfg.workers)
                .map_err(|e| e.to_string())?
        }
        mode @ ("orbit" | "block") => {
            let n = *require(&cfg.n, "--n for windowed modes")?;
            let catalog_spec = require(&cfg.catalog, "--catalog for windowed modes")?;
            let catalog = ctx.build_catalog(catalog_spec)?;
            let folner = ctx.build_folner(cfg.folner.as_deref())?;
            let tol = match cfg.tol {
                Some(t) => t,
                None => default_tol(
                    y.alphabet().size(),
                    min_domain_size(&catalog),
                    windowed_anchor_count(ctx, &a, &folner, n)?,
                ),
            };
            if mode == "orbit" {
                orbit_normality(ctx, &y, &a, &folner, n, &catalog, tol, cfg.workers)
                    .map_err(|e| e.to_string())?
            } else {
                block_normality(
                    ctx,
                    &y,
                    &a,
                    &folner,
                    n,
                    &catalog,
                    tol,
                    cfg.visibility_floor,
                    cfg.workers,
                )
                .map_err(|e| e.to_string())?
            }
        }
        "classical" => {
            let horizon = *require(&cfg.horizon, "--horizon for mode classical")?;
            let catalog_spec = require(&cfg.catalog, "--catalog for mode classical")?;
            let m_max = ctx.build_catalog(catalog_spec)?.len();
            let tol = match cfg.tol {
                Some(t) => t,
                None => default_tol(
                    y.alphabet().size(),
                    1,
                    classical_anchor_count(ctx, &a, horizon)?,
                ),
            };
            classical_normality_along(ctx, &y, &a, m_max, horizon, tol)
                .map_err(|e| e.to_string())?
        }
        other => return Err(format!("unknown mode {other}")),
    };
    let mut body = report.to_json();
    body.push('\n');
    emit(cfg, Command::Normality, body.as_bytes(), false)?;
    Ok(if report.verdict { 0 } else { 2 })
}

fn run_complexity<G: CliGroup>(ctx: &G, cfg: &Resolved) -> Result<i32, String> {
    let x = ctx.build_generator(cfg)?;
    let catalog = ctx.build_catalog(require(&cfg.catalog, "--catalog for complexity")?)?;
    let n = *require(&cfg.n, "--n for complexity")?;
    let folner = ctx.build_folner(cfg.folner.as_deref())?;
    let anchors = folner.at(ctx, n).map_err(|e| e.to_string())?;
    let eps = match cfg.eps.as_deref() {
        Some(text) => Some(parse_rational(text)?),
        None => None,
    };
    let profile = rate_profile(ctx, &x, &catalog, &anchors, eps.as_ref(), cfg.workers)
        .map_err(|e| e.to_string())?;
    let body = match cfg.format.as_deref().unwrap_or("csv") {
        "csv" => profile.to_csv(),
        "json" => {
            let mut b = profile.to_json();
            b.push('\n');
            b
        }
        other => return Err(format!("complexity supports csv or json output, not {other}")),
    };
    emit(cfg, Command::Complexity, body.as_bytes(), false)?;
    Ok(0)
}

fn run_experiment<G: CliGroup>(ctx: &G, cfg: &Resolved) -> Result<i32, String> {
    match cfg.format.as_deref().unwrap_or("json") {
        "json" => {}
        other => return Err(format!("experiment reports are json, not {other}")),
    }
    let y = ctx.build_generator(cfg)?;
    let set_spec = require(&cfg.set, "--set for experiment")?;
    let a = ctx.build_subset(set_spec, Some(&y))?;
    let n = *require(&cfg.n, "--n for experiment")?;
    let catalog = ctx.build_catalog(require(&cfg.catalog, "--catalog for experiment")?)?;
    let folner = ctx.build_folner(cfg.folner.as_deref())?;
    let tol = match cfg.tol {
        Some(t) => t,
        None => default_tol(
            y.alphabet().size(),
            1,
            windowed_anchor_count(ctx, &a, &folner, n)?,
        ),
    };
    let bundle = preservation_experiment(
        ctx,
        &y,
        &a,
        &folner,
        n,
        &catalog,
        tol,
        cfg.visibility_floor,
        cfg.workers,
    )
    .map_err(|e| e.to_string())?;
    let mut body = bundle.to_json();
    body.push('\n');
    emit(cfg, Command::Experiment, body.as_bytes(), false)?;
    Ok(if bundle.verdict { 0 } else { 2 })
}
