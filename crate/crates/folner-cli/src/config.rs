//! Flag set, optional key=value config file, and the merged run
//! configuration. Flags always override file entries; everything is
//! validated before any command executes so identical configurations
//! produce byte-identical reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;

/// One flag set shared by every subcommand. All values are optional here;
/// per-command requirements are enforced after the config file is merged.
#[derive(Args, Debug, Default, Clone)]
pub struct CommonArgs {
    /// Carrier: n, z, z2, z3, nmul, or perm.
    #[arg(long)]
    pub group: Option<String>,

    /// Generator spec, e.g. prng, prng:3, thue-morse, constant:0,
    /// indicator:<set>, automatic:<automaton-file>,<digit-system-file>,
    /// mult-thue-morse, mult-automatic:<automaton-file>,<base>.
    #[arg(long)]
    pub gen: Option<String>,

    /// Seed for stochastic generators (required by prng; no clock default).
    #[arg(long)]
    pub seed: Option<u64>,

    /// Følner sequence name (default: the group's canonical sequence).
    #[arg(long)]
    pub folner: Option<String>,

    /// Window index n.
    #[arg(long)]
    pub n: Option<u32>,

    /// Enumeration horizon (generate, classical normality).
    #[arg(long)]
    pub horizon: Option<u64>,

    /// Subset spec, e.g. all, evens, residue:3,1, squarefree,
    /// bfree:4,9,25, ones, positives, sqrt2-halfline, kfree:2, incr:3.
    #[arg(long)]
    pub set: Option<String>,

    /// Normality mode: simple, orbit, block, or classical.
    #[arg(long)]
    pub mode: Option<String>,

    /// Test-domain catalog spec: intervals:M or cubes:M.
    #[arg(long)]
    pub catalog: Option<String>,

    /// Complexity discard budget: a decimal like 0.05 or a fraction like 1/20.
    #[arg(long)]
    pub eps: Option<String>,

    /// Verdict tolerance (default: max(5e-3, 4*sqrt(p(1-p)/N))).
    #[arg(long)]
    pub tol: Option<f64>,

    /// Output path (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Output format: json, csv, or raw (command-dependent default).
    #[arg(long)]
    pub format: Option<String>,

    /// Key=value config file; flags override file entries.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Worker threads for window scans (results are worker-independent).
    #[arg(long)]
    pub workers: Option<usize>,

    /// Block-normality visibility floor (default 0.01).
    #[arg(long)]
    pub visibility_floor: Option<f64>,
}

/// Fully merged and defaulted configuration for one command run.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub group: String,
    pub gen: Option<String>,
    pub seed: Option<u64>,
    pub folner: Option<String>,
    pub n: Option<u32>,
    pub horizon: Option<u64>,
    pub set: Option<String>,
    pub mode: String,
    pub catalog: Option<String>,
    pub eps: Option<String>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub workers: usize,
    pub visibility_floor: f64,
}

fn parse_field<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| format!("config key {key}: {e}"))
}

/// Parse a key=value file: one assignment per line, `#` comments and blank
/// lines ignored, unknown keys rejected.
fn parse_config_file(path: &PathBuf) -> Result<BTreeMap<String, String>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config file {}: {e}", path.display()))?;
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value", lineno + 1))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        const KNOWN: [&str; 14] = [
            "group", "gen", "seed", "folner", "n", "horizon", "set", "mode", "catalog", "eps",
            "tol", "format", "workers", "visibility_floor",
        ];
        if !KNOWN.contains(&key.as_str()) {
            return Err(format!("config line {}: unknown key {key}", lineno + 1));
        }
        map.insert(key, value);
    }
    Ok(map)
}

impl CommonArgs {
    /// Merge flags over the optional config file and apply defaults.
    pub fn resolve(&self) -> Result<Resolved, String> {
        let file = match &self.config {
            Some(path) => parse_config_file(path)?,
            None => BTreeMap::new(),
        };
        let take = |key: &str| file.get(key).map(String::as_str);

        let group = match (&self.group, take("group")) {
            (Some(v), _) => v.clone(),
            (None, Some(v)) => v.to_string(),
            (None, None) => "n".to_string(),
        };
        let string_field = |flag: &Option<String>, key: &str| -> Option<String> {
            flag.clone().or_else(|| take(key).map(str::to_string))
        };

        let seed = match (self.seed, take("seed")) {
            (Some(v), _) => Some(v),
            (None, Some(v)) => Some(parse_field("seed", v)?),
            (None, None) => None,
        };
        let n = match (self.n, take("n")) {
            (Some(v), _) => Some(v),
            (None, Some(v)) => Some(parse_field("n", v)?),
            (None, None) => None,
        };
        let horizon = match (self.horizon, take("horizon")) {
            (Some(v), _) => Some(v),
            (None, Some(v)) => Some(parse_field("horizon", v)?),
            (None, None) => None,
        };
        let tol = match (self.tol, take("tol")) {
            (Some(v), _) => Some(v),
            (None, Some(v)) => Some(parse_field("tol", v)?),
            (None, None) => None,
        };
        let workers = match (self.workers, take("workers")) {
            (Some(v), _) => v,
            (None, Some(v)) => parse_field("workers", v)?,
            (None, None) => 1,
        };
        let visibility_floor = match (self.visibility_floor, take("visibility_floor")) {
            (Some(v), _) => v,
            (None, Some(v)) => parse_field("visibility_floor", v)?,
            (None, None) => 0.01,
        };
        if workers == 0 {
            return Err("workers must be at least 1".into());
        }

        Ok(Resolved {
            group,
            gen: string_field(&self.gen, "gen"),
            seed,
            folner: string_field(&self.folner, "folner"),
            n,
            horizon,
            set: string_field(&self.set, "set"),
            mode: string_field(&self.mode, "mode").unwrap_or_else(|| "simple".to_string()),
            catalog: string_field(&self.catalog, "catalog"),
            eps: string_field(&self.eps, "eps"),
            tol,
            out: self.out.clone(),
            format: string_field(&self.format, "format"),
            workers,
            visibility_floor,
        })
    }
}

impl Resolved {
    /// Deterministic key=value echo of every set field, for sidecar files.
    pub fn echo(&self, command: &str) -> String {
        let mut out = String::new();
        let mut put = |key: &str, value: String| {
            let _ = writeln!(out, "{key} = {value}");
        };
        put("command", command.to_string());
        put("group", self.group.clone());
        if let Some(v) = &self.gen {
            put("gen", v.clone());
        }
        if let Some(v) = self.seed {
            put("seed", v.to_string());
        }
        if let Some(v) = &self.folner {
            put("folner", v.clone());
        }
        if let Some(v) = self.n {
            put("n", v.to_string());
        }
        if let Some(v) = self.horizon {
            put("horizon", v.to_string());
        }
        if let Some(v) = &self.set {
            put("set", v.clone());
        }
        put("mode", self.mode.clone());
        if let Some(v) = &self.catalog {
            put("catalog", v.clone());
        }
        if let Some(v) = &self.eps {
            put("eps", v.clone());
        }
        if let Some(v) = self.tol {
            put("tol", folner::fmt_sig12(v));
        }
        if let Some(v) = &self.format {
            put("format", v.clone());
        }
        put("workers", self.workers.to_string());
        put("visibility_floor", folner::fmt_sig12(self.visibility_floor));
        out
    }
}

/// Parse an exact rational from a decimal ("0.05") or fraction ("1/20").
pub fn parse_rational(text: &str) -> Result<folner::Rational, String> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: u64 = num.trim().parse().map_err(|_| format!("bad fraction {text}"))?;
        let den: u64 = den.trim().parse().map_err(|_| format!("bad fraction {text}"))?;
        if den == 0 {
            return Err(format!("zero denominator in {text}"));
        }
        return Ok(folner::ratio(num, den));
    }
    let (whole, frac) = match text.split_once('.') {
        Some((w, f)) => (w, f),
        None => (text, ""),
    };
    if !frac.chars().all(|c| c.is_ascii_digit()) || frac.len() > 18 {
        return Err(format!("bad decimal {text}"));
    }
    let whole: u64 = if whole.is_empty() {
        0
    } else {
        whole.parse().map_err(|_| format!("bad decimal {text}"))?
    };
    let scale = 10u64.pow(frac.len() as u32);
    let frac_num: u64 =
        if frac.is_empty() { 0 } else { frac.parse().map_err(|_| format!("bad decimal {text}"))? };
    Ok(folner::ratio(whole * scale + frac_num, scale))
}
