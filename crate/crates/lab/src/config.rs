//! Run configuration: per-command defaults, then a `key=value` file, then
//! flags. Every resolved key is echoed into reports.

use std::collections::BTreeMap;
use std::hash::{BuildHasher, Hasher};
use std::path::{Path, PathBuf};

use sibm_core::processes::ProcessModel;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum UsageError {
    #[error("unknown configuration key '{0}'")]
    UnknownKey(String),
    #[error("invalid value '{value}' for '{key}': {reason}")]
    InvalidValue { key: String, value: String, reason: String },
    #[error("config file line {line}: expected key=value")]
    Malformed { line: usize },
    #[error("cannot read config file {path}: {reason}")]
    Unreadable { path: String, reason: String },
    #[error("'{0}' is required for this command")]
    Missing(String),
}

/// Every key accepted in a config file or as a flag.
pub const KEYS: &[&str] = &[
    "a",
    "alpha",
    "b",
    "dim",
    "eps",
    "format",
    "grid",
    "in",
    "increments",
    "lambda",
    "lattices",
    "level",
    "mesh",
    "mode",
    "model",
    "out",
    "raw",
    "reflect",
    "replicates",
    "retime",
    "seed",
    "sigma-end",
    "steps",
    "threads",
    "tmax",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Lattice,
    VerifyBm,
    VerifySiv,
    VerifyStationarity,
    McHit,
    McExit,
    DiagSlln,
    DiagLil,
    DiagZeros,
    DiagFrontier,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Lattice => "lattice",
            Command::VerifyBm => "verify bm",
            Command::VerifySiv => "verify siv",
            Command::VerifyStationarity => "verify stationarity",
            Command::McHit => "mc hit",
            Command::McExit => "mc exit",
            Command::DiagSlln => "diag slln",
            Command::DiagLil => "diag lil",
            Command::DiagZeros => "diag zeros",
            Command::DiagFrontier => "diag frontier",
        }
    }

    fn defaults(self) -> Vec<(&'static str, &'static str)> {
        let mut d = vec![
            ("a", "-1"),
            ("alpha", "0.01"),
            ("b", "1"),
            ("dim", "2"),
            ("eps", "0.005"),
            ("grid", "256"),
            ("increments", "10000"),
            ("lambda", "1"),
            ("lattices", "50"),
            ("level", "1"),
            ("mesh", "0.001"),
            ("mode", "path"),
            ("model", "sibm"),
            ("reflect", "false"),
            ("sigma-end", "1"),
            ("steps", "1000"),
            ("threads", "0"),
            ("tmax", "1"),
        ];
        let (format, replicates) = match self {
            Command::Simulate => ("csv", "1"),
            Command::Lattice => ("json", "1"),
            Command::VerifyBm => ("json", "200"),
            Command::VerifySiv => ("json", "500"),
            Command::VerifyStationarity => ("json", "2000"),
            Command::McHit | Command::McExit => ("json", "100000"),
            Command::DiagSlln | Command::DiagLil | Command::DiagZeros => ("json", "1000"),
            Command::DiagFrontier => ("json", "1000"),
        };
        d.push(("format", format));
        d.push(("replicates", replicates));
        match self {
            Command::McExit => d.push(("b", "2")),
            Command::DiagFrontier => d.push(("level", "2")),
            // Bands must be cut by grid lines differently for the bases to
            // differ in shape.
            Command::VerifyStationarity => d.push(("grid", "10")),
            Command::DiagSlln | Command::DiagLil | Command::DiagZeros => d.push(("mesh", "1")),
            _ => {}
        }
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Path,
    Field,
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub dim: usize,
    pub grid: usize,
    pub tmax: f64,
    pub mesh: f64,
    pub seed: u64,
    pub replicates: usize,
    pub model: ProcessModel,
    pub lambda: f64,
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
    pub level: f64,
    pub sigma_end: f64,
    pub steps: usize,
    pub increments: usize,
    pub lattices: usize,
    pub eps: f64,
    pub mode: Mode,
    pub reflect: bool,
    pub retime: Option<f64>,
    pub threads: usize,
    pub format: Format,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub raw: Option<PathBuf>,
    /// Resolved `key → value` pairs, seed included.
    pub resolved: BTreeMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('_', "-")
}

/// Reads a `key=value` file. Blank lines and lines starting with `#` are
/// ignored.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, UsageError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError::Unreadable { path: path.display().to_string(), reason: e.to_string() })?;
    parse_config_text(&text)
}

pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, UsageError> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(UsageError::Malformed { line: i + 1 })?;
        let k = normalize(k);
        if !KEYS.contains(&k.as_str()) {
            return Err(UsageError::UnknownKey(k));
        }
        map.insert(k, v.trim().to_string());
    }
    Ok(map)
}

fn invalid(key: &str, value: &str, reason: &str) -> UsageError {
    UsageError::InvalidValue { key: key.into(), value: value.into(), reason: reason.into() }
}

struct Resolver<'a> {
    map: &'a BTreeMap<String, String>,
}

impl Resolver<'_> {
    fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str, reason: &str) -> Result<T, UsageError> {
        let v = self.raw(key).ok_or_else(|| UsageError::Missing(key.into()))?;
        v.parse().map_err(|_| invalid(key, v, reason))
    }

    fn float(&self, key: &str, ok: impl Fn(f64) -> bool, reason: &str) -> Result<f64, UsageError> {
        let x: f64 = self.parse(key, "not a number")?;
        if !x.is_finite() || !ok(x) {
            return Err(invalid(key, self.raw(key).unwrap_or_default(), reason));
        }
        Ok(x)
    }

    fn count(&self, key: &str, min: usize) -> Result<usize, UsageError> {
        let n: usize = self.parse(key, "expected a nonnegative integer")?;
        if n < min {
            return Err(invalid(key, self.raw(key).unwrap_or_default(), &format!("must be at least {min}")));
        }
        Ok(n)
    }
}

/// A seed for runs that did not ask for one.
pub fn fresh_seed() -> u64 {
    std::collections::hash_map::RandomState::new().build_hasher().finish()
}

/// Merges defaults, file values and flag values (later wins) and validates
/// the result. A missing seed is drawn with [`fresh_seed`] and reported
/// through `on_seed`.
pub fn resolve(
    command: Command,
    file: &BTreeMap<String, String>,
    flags: &BTreeMap<String, String>,
    on_seed: impl FnOnce(u64),
) -> Result<RunConfig, UsageError> {
    let mut map: BTreeMap<String, String> =
        command.defaults().into_iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    for (k, v) in file.iter().chain(flags) {
        let k = normalize(k);
        if !KEYS.contains(&k.as_str()) {
            return Err(UsageError::UnknownKey(k));
        }
        map.insert(k, v.clone());
    }
    if !map.contains_key("seed") {
        let seed = fresh_seed();
        on_seed(seed);
        map.insert("seed".into(), seed.to_string());
    }
    let r = Resolver { map: &map };

    let lambda = r.float("lambda", |x| x > 0.0, "must be positive")?;
    let model = match r.raw("model").unwrap_or_default() {
        "sibm" => ProcessModel::Sibm,
        "poisson" => ProcessModel::CenteredPoisson { lambda },
        "common-factor" | "common" => ProcessModel::CommonFactor,
        "variance-skew" | "skew" => ProcessModel::VarianceSkew,
        other => return Err(invalid("model", other, "expected sibm, poisson, common-factor or variance-skew")),
    };
    let format = match r.raw("format").unwrap_or_default() {
        "json" => Format::Json,
        "csv" => Format::Csv,
        other => return Err(invalid("format", other, "expected json or csv")),
    };
    let mode = match r.raw("mode").unwrap_or_default() {
        "path" => Mode::Path,
        "field" => Mode::Field,
        other => return Err(invalid("mode", other, "expected path or field")),
    };
    let retime = match r.raw("retime") {
        None | Some("") => None,
        Some(_) => Some(r.float("retime", |x| x > 0.0, "must be positive")?),
    };
    let path = |key: &str| r.raw(key).filter(|s| !s.is_empty()).map(PathBuf::from);

    Ok(RunConfig {
        command,
        dim: r.count("dim", 1)?,
        grid: r.count("grid", 1)?,
        tmax: r.float("tmax", |x| x > 0.0, "must be positive")?,
        mesh: r.float("mesh", |x| x > 0.0, "must be positive")?,
        seed: r.parse("seed", "expected an unsigned 64-bit integer")?,
        replicates: r.count("replicates", 1)?,
        model,
        lambda,
        alpha: r.float("alpha", |x| x > 0.0 && x < 1.0, "must lie in (0, 1)")?,
        a: r.float("a", |_| true, "")?,
        b: r.float("b", |_| true, "")?,
        level: r.float("level", |_| true, "")?,
        sigma_end: r.float("sigma-end", |x| x > 0.0, "must be positive")?,
        steps: r.count("steps", 1)?,
        increments: r.count("increments", 1000)?,
        lattices: r.count("lattices", 1)?,
        eps: r.float("eps", |x| x >= 0.0, "must be nonnegative")?,
        mode,
        reflect: r.parse("reflect", "expected true or false")?,
        retime,
        threads: r.count("threads", 0)?,
        format,
        input: path("in"),
        out: path("out"),
        raw: path("raw"),
        resolved: map.clone(),
    })
}

impl RunConfig {
    /// The resolved configuration as a `key=value` file.
    pub fn to_config_text(&self) -> String {
        self.resolved.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}
