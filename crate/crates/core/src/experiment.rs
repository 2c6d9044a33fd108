//! Experiment configuration, validation and seeded runs.
//!
//! A config is a flat `key = value` text file; `#` starts a comment. Later
//! assignments win, which is how command-line overrides are layered on top of
//! a file. Numbers accept `pi`, fractions and `sqrt(..)`, e.g. `mu_grid =
//! 0, pi/8, pi/4`; grids also accept `linspace(start, stop, count)`.
//!
//! [`run`] returns the output bytes and a [`RunManifest`]. The manifest echoes
//! every resolved field, so [`replay`] reproduces the bytes exactly.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::branch::{ising_evolve, predictability_sieve, sample_couplings, CouplingSet};
use crate::envariance::born_via_envariance;
use crate::error::Error;
use crate::info::{
    haar_pip, pip_curve, redundancy_from_curve, redundancy_ridge, MeasurementScheme, PipCurve, RidgeOptions,
};
use crate::qbm::{qbm_mutual_information, qbm_redundancy, InfoUnit, QbmParams, ANALYTIC_TAG};
use crate::seed::{split_seed, STREAM_BASES, STREAM_COUPLINGS, STREAM_FRAGMENTS, STREAM_HAAR, STREAM_OUTCOMES};
use crate::C64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const TOOL: &str = "qdarwin";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Pip,
    HaarPip,
    Redundancy,
    Ridge,
    Sieve,
    Envariance,
    Qbm,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::Pip,
        ExperimentKind::HaarPip,
        ExperimentKind::Redundancy,
        ExperimentKind::Ridge,
        ExperimentKind::Sieve,
        ExperimentKind::Envariance,
        ExperimentKind::Qbm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Pip => "pip",
            ExperimentKind::HaarPip => "haar-pip",
            ExperimentKind::Redundancy => "redundancy",
            ExperimentKind::Ridge => "ridge",
            ExperimentKind::Sieve => "sieve",
            ExperimentKind::Envariance => "envariance",
            ExperimentKind::Qbm => "qbm",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// A problem with one config field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

impl Diagnostic {
    fn new(field: &str, message: impl Into<String>) -> Self {
        Diagnostic { field: field.to_string(), message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Kept as text until [`ExperimentConfig::validate`] so that a bad name is
    /// a diagnostic rather than a parse failure.
    pub experiment: String,
    pub n_env: usize,
    /// Environment sizes for `redundancy`; empty means `[n_env]`.
    pub n_env_grid: Vec<usize>,
    pub action: f64,
    /// Empty means `[action]`.
    pub a_grid: Vec<f64>,
    pub mu_grid: Vec<f64>,
    /// Times for `sieve`; empty means `a_grid / ⟨g⟩`.
    pub t_grid: Vec<f64>,
    pub delta: f64,
    pub n_samples: usize,
    pub n_states: usize,
    pub n_system: usize,
    pub n_outcome_samples: usize,
    pub exact_limit: usize,
    pub scheme: String,
    pub h_s: f64,
    pub s: f64,
    pub unit: String,
    pub f_grid: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub max_denominator: u64,
    pub seed: u64,
    pub output_path: Option<String>,
    pub output_format: OutputFormat,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: String::new(),
            n_env: 50,
            n_env_grid: Vec::new(),
            action: 1.0,
            a_grid: Vec::new(),
            mu_grid: linspace(0.0, FRAC_PI_2, 9),
            t_grid: Vec::new(),
            delta: 0.1,
            n_samples: 100,
            n_states: 20,
            n_system: 1,
            n_outcome_samples: 2000,
            exact_limit: 10,
            scheme: "optimal".into(),
            h_s: 1.0,
            s: 10.0,
            unit: "bits".into(),
            f_grid: linspace(0.05, 0.95, 19),
            amplitudes: vec![(2.0f64 / 3.0).sqrt(), (1.0f64 / 3.0).sqrt()],
            max_denominator: 10_000,
            seed: 0,
            output_path: None,
            output_format: OutputFormat::Csv,
        }
    }
}

pub const KEYS: [&str; 23] = [
    "experiment",
    "n_env",
    "n_env_grid",
    "action",
    "a_grid",
    "mu_grid",
    "t_grid",
    "delta",
    "n_samples",
    "n_states",
    "n_system",
    "n_outcome_samples",
    "exact_limit",
    "scheme",
    "h_s",
    "s",
    "unit",
    "f_grid",
    "amplitudes",
    "max_denominator",
    "seed",
    "output_path",
    "output_format",
];

fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count).map(|i| start + (stop - start) * i as f64 / (count - 1) as f64).collect(),
    }
}

/// `1.5`, `pi`, `3*pi/4`, `sqrt(2/3)`.
fn parse_number(text: &str) -> Option<f64> {
    let t = text.trim();
    if let Some(v) = t.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')).and_then(parse_number) {
        return Some(v.sqrt());
    }
    if let Some((a, b)) = t.rsplit_once('/') {
        return Some(parse_number(a)? / parse_number(b)?);
    }
    if let Some((a, b)) = t.rsplit_once('*') {
        return Some(parse_number(a)? * parse_number(b)?);
    }
    match t {
        "pi" => Some(PI),
        _ => t.parse::<f64>().ok(),
    }
}

fn parse_grid(text: &str) -> Option<Vec<f64>> {
    let t = text.trim();
    if t.is_empty() {
        return Some(Vec::new());
    }
    if let Some(inner) = t.strip_prefix("linspace(").and_then(|r| r.strip_suffix(')')) {
        let parts: Vec<&str> = inner.split(',').collect();
        if parts.len() != 3 {
            return None;
        }
        let count = parts[2].trim().parse::<usize>().ok()?;
        return Some(linspace(parse_number(parts[0])?, parse_number(parts[1])?, count));
    }
    t.split(',').map(parse_number).collect()
}

fn parse_count(text: &str) -> Option<usize> {
    text.trim().parse::<usize>().ok()
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

/// Split config text into `(key, value)` pairs, reporting malformed lines.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, Vec<Diagnostic>> {
    let mut pairs = Vec::new();
    let mut diags = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) => pairs.push((k.trim().to_string(), v.trim().to_string())),
            None => diags.push(Diagnostic::new(&format!("line {}", lineno + 1), format!("expected `key = value`, got `{line}`"))),
        }
    }
    if diags.is_empty() {
        Ok(pairs)
    } else {
        Err(diags)
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, Vec<Diagnostic>> {
        Self::from_pairs(parse_pairs(text)?)
    }

    pub fn from_pairs<I, K, V>(pairs: I) -> Result<Self, Vec<Diagnostic>>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut config = ExperimentConfig::default();
        let diags: Vec<Diagnostic> =
            pairs.into_iter().filter_map(|(k, v)| config.set(k.as_ref(), v.as_ref()).err()).collect();
        if diags.is_empty() {
            Ok(config)
        } else {
            Err(diags)
        }
    }

    /// Assign one field from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), Diagnostic> {
        let bad = |what: &str| Diagnostic::new(key, format!("expected {what}, got `{value}`"));
        let number = || parse_number(value).ok_or_else(|| bad("a number"));
        let count = || parse_count(value).ok_or_else(|| bad("a non-negative integer"));
        let grid = || parse_grid(value).ok_or_else(|| bad("a comma-separated list of numbers"));
        match key {
            "experiment" => self.experiment = value.trim().to_string(),
            "n_env" => self.n_env = count()?,
            "n_env_grid" => {
                self.n_env_grid = if value.trim().is_empty() {
                    Vec::new()
                } else {
                    value.split(',').map(parse_count).collect::<Option<_>>().ok_or_else(|| bad("a list of counts"))?
                }
            }
            "action" => self.action = number()?,
            "a_grid" => self.a_grid = grid()?,
            "mu_grid" => self.mu_grid = grid()?,
            "t_grid" => self.t_grid = grid()?,
            "delta" => self.delta = number()?,
            "n_samples" => self.n_samples = count()?,
            "n_states" => self.n_states = count()?,
            "n_system" => self.n_system = count()?,
            "n_outcome_samples" => self.n_outcome_samples = count()?,
            "exact_limit" => self.exact_limit = count()?,
            "scheme" => self.scheme = value.trim().to_string(),
            "h_s" => self.h_s = number()?,
            "s" => self.s = number()?,
            "unit" => self.unit = value.trim().to_string(),
            "f_grid" => self.f_grid = grid()?,
            "amplitudes" => self.amplitudes = grid()?,
            "max_denominator" => self.max_denominator = value.trim().parse().map_err(|_| bad("a positive integer"))?,
            "seed" => self.seed = value.trim().parse().map_err(|_| bad("a 64-bit unsigned integer"))?,
            "output_path" => {
                self.output_path = Some(value.trim().to_string()).filter(|p| !p.is_empty());
            }
            "output_format" => {
                self.output_format = match value.trim() {
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    _ => return Err(bad("`csv` or `json`")),
                }
            }
            _ => {
                return Err(Diagnostic::new(key, format!("unknown key; known keys: {}", KEYS.join(", "))));
            }
        }
        Ok(())
    }

    /// Every field in a form [`ExperimentConfig::set`] parses back exactly.
    pub fn to_pairs(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("experiment", self.experiment.clone());
        put("n_env", self.n_env.to_string());
        put("n_env_grid", join(&self.n_env_grid));
        put("action", self.action.to_string());
        put("a_grid", join(&self.a_grid));
        put("mu_grid", join(&self.mu_grid));
        put("t_grid", join(&self.t_grid));
        put("delta", self.delta.to_string());
        put("n_samples", self.n_samples.to_string());
        put("n_states", self.n_states.to_string());
        put("n_system", self.n_system.to_string());
        put("n_outcome_samples", self.n_outcome_samples.to_string());
        put("exact_limit", self.exact_limit.to_string());
        put("scheme", self.scheme.clone());
        put("h_s", self.h_s.to_string());
        put("s", self.s.to_string());
        put("unit", self.unit.clone());
        put("f_grid", join(&self.f_grid));
        put("amplitudes", join(&self.amplitudes));
        put("max_denominator", self.max_denominator.to_string());
        put("seed", self.seed.to_string());
        put("output_path", self.output_path.clone().unwrap_or_default());
        put("output_format", self.output_format.extension().to_string());
        m
    }

    pub fn kind(&self) -> Option<ExperimentKind> {
        ExperimentKind::parse(&self.experiment)
    }

    pub fn actions(&self) -> Vec<f64> {
        if self.a_grid.is_empty() {
            vec![self.action]
        } else {
            self.a_grid.clone()
        }
    }

    pub fn env_sizes(&self) -> Vec<usize> {
        if self.n_env_grid.is_empty() {
            vec![self.n_env]
        } else {
            self.n_env_grid.clone()
        }
    }

    /// Empty iff [`run`] would start.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut d = Vec::new();
        let Some(kind) = self.kind() else {
            let names: Vec<&str> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
            let mut msg = if self.experiment.is_empty() {
                "missing".to_string()
            } else {
                format!("unknown experiment `{}`", self.experiment)
            };
            if let Some(close) = names.iter().min_by_key(|n| edit_distance(n, &self.experiment)) {
                if !self.experiment.is_empty() && edit_distance(close, &self.experiment) <= 3 {
                    msg.push_str(&format!("; did you mean `{close}`?"));
                }
            }
            msg.push_str(&format!("; expected one of: {}", names.join(", ")));
            d.push(Diagnostic::new("experiment", msg));
            return d;
        };
        let positive = |d: &mut Vec<Diagnostic>, field: &str, v: usize| {
            if v == 0 {
                d.push(Diagnostic::new(field, "must be at least 1"));
            }
        };
        positive(&mut d, "n_env", self.n_env);
        if self.n_env_grid.contains(&0) {
            d.push(Diagnostic::new("n_env_grid", "every size must be at least 1"));
        }
        positive(&mut d, "n_samples", self.n_samples);
        positive(&mut d, "n_states", self.n_states);
        positive(&mut d, "n_system", self.n_system);
        positive(&mut d, "n_outcome_samples", self.n_outcome_samples);
        if self.exact_limit == 0 || self.exact_limit > crate::info::OUTCOME_ENUMERATION_LIMIT {
            d.push(Diagnostic::new(
                "exact_limit",
                format!("must lie in 1..={}", crate::info::OUTCOME_ENUMERATION_LIMIT),
            ));
        }
        let delta_ok = if kind == ExperimentKind::Qbm {
            self.delta > 0.0 && self.delta <= 1.0
        } else {
            self.delta > 0.0 && self.delta < 1.0
        };
        if !delta_ok {
            let range = if kind == ExperimentKind::Qbm { "(0, 1]" } else { "(0, 1)" };
            d.push(Diagnostic::new("delta", format!("{} outside {range}", self.delta)));
        }
        if !(self.action.is_finite() && self.action >= 0.0) {
            d.push(Diagnostic::new("action", "must be finite and non-negative"));
        }
        if self.a_grid.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            d.push(Diagnostic::new("a_grid", "actions must be finite and non-negative"));
        }
        if self.t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            d.push(Diagnostic::new("t_grid", "times must be finite and non-negative"));
        }
        if self.mu_grid.is_empty() {
            d.push(Diagnostic::new("mu_grid", "must not be empty"));
        } else if self.mu_grid.iter().any(|m| !(*m >= 0.0 && *m <= FRAC_PI_2 + 1e-12)) {
            d.push(Diagnostic::new("mu_grid", "angles must lie in [0, pi/2]"));
        }
        if self.f_grid.is_empty() {
            d.push(Diagnostic::new("f_grid", "must not be empty"));
        } else if self.f_grid.iter().any(|f| !(*f > 0.0 && *f < 1.0)) {
            d.push(Diagnostic::new("f_grid", "fractions must lie strictly inside (0, 1)"));
        }
        if !matches!(self.scheme.as_str(), "optimal" | "random") {
            d.push(Diagnostic::new("scheme", format!("unknown `{}`; expected `optimal` or `random`", self.scheme)));
        }
        if !matches!(self.unit.as_str(), "bits" | "nats") {
            d.push(Diagnostic::new("unit", format!("unknown `{}`; expected `bits` or `nats`", self.unit)));
        }
        if !(self.s.is_finite() && self.s >= 1.0) {
            d.push(Diagnostic::new("s", "squeeze factor must be at least 1"));
        }
        if !(self.h_s.is_finite() && self.h_s >= 0.0) {
            d.push(Diagnostic::new("h_s", "must be finite and non-negative"));
        }
        let norm_sqr: f64 = self.amplitudes.iter().map(|a| a * a).sum();
        if self.amplitudes.is_empty() || !(norm_sqr.is_finite() && norm_sqr > 0.0) {
            d.push(Diagnostic::new("amplitudes", "need at least one nonzero finite amplitude"));
        }
        if self.max_denominator < self.amplitudes.len().max(1) as u64 {
            d.push(Diagnostic::new("max_denominator", "must be at least the number of amplitudes"));
        }
        d
    }
}

fn edit_distance(a: &str, b: &str) -> usize {
    let b: Vec<char> = b.chars().collect();
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.chars().enumerate() {
        let mut prev = row[0];
        row[0] = i + 1;
        for j in 0..b.len() {
            let cur = row[j + 1];
            row[j + 1] = (prev + usize::from(ca != b[j])).min(row[j] + 1).min(cur + 1);
            prev = cur;
        }
    }
    row[b.len()]
}

/// `%.12g`: 12 significant digits, trailing zeros trimmed, exponent form
/// outside `[1e-4, 1e12)`.
pub fn format_g(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= DIGITS {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (DIGITS - 1 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(x) => format_g(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Float(x) => serde_json::Number::from_f64(*x).map_or(serde_json::Value::Null, serde_json::Value::Number),
            Cell::Int(n) => (*n).into(),
            Cell::Bool(b) => (*b).into(),
            Cell::Text(s) => s.clone().into(),
        }
    }
}

/// Tabular result of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Scalars describing the run as a whole, in insertion order.
    pub meta: Vec<(String, String)>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new(), meta: Vec::new() }
    }

    fn meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn render(&self, format: OutputFormat, experiment: ExperimentKind, seed: u64) -> Vec<u8> {
        match format {
            OutputFormat::Csv => {
                let mut out = format!("# {TOOL} {VERSION} experiment={} seed={seed}", experiment.name());
                for (k, v) in &self.meta {
                    out.push_str(&format!(" {k}={v}"));
                }
                out.push('\n');
                out.push_str(&self.columns.join(","));
                out.push('\n');
                for row in &self.rows {
                    out.push_str(&row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
                    out.push('\n');
                }
                out.into_bytes()
            }
            OutputFormat::Json => {
                let meta: serde_json::Map<String, serde_json::Value> =
                    self.meta.iter().map(|(k, v)| (k.clone(), v.clone().into())).collect();
                let rows: Vec<serde_json::Value> =
                    self.rows.iter().map(|r| r.iter().map(Cell::json).collect::<Vec<_>>().into()).collect();
                let doc = serde_json::json!({
                    "tool": TOOL,
                    "version": VERSION,
                    "experiment": experiment.name(),
                    "seed": seed,
                    "meta": meta,
                    "columns": self.columns,
                    "rows": rows,
                });
                let mut bytes = serde_json::to_vec_pretty(&doc).expect("JSON values serialize");
                bytes.push(b'\n');
                bytes
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub experiment: String,
    /// Every resolved config field.
    pub config: BTreeMap<String, String>,
    /// Seeds of the independent random streams derived from the master seed.
    pub seeds: BTreeMap<String, u64>,
    pub wall_clock_seconds: f64,
    pub output_path: Option<String>,
    pub output_format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub bytes: Vec<u8>,
    pub table: Table,
    pub manifest: RunManifest,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunError {
    Config(Vec<Diagnostic>),
    Compute(Error),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(diags) => {
                let lines: Vec<String> = diags.iter().map(Diagnostic::to_string).collect();
                write!(f, "invalid config:\n  {}", lines.join("\n  "))
            }
            RunError::Compute(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Compute(e)
    }
}

fn stream_seeds(seed: u64) -> BTreeMap<String, u64> {
    [
        ("couplings", STREAM_COUPLINGS),
        ("fragments", STREAM_FRAGMENTS),
        ("haar", STREAM_HAAR),
        ("bases", STREAM_BASES),
        ("outcomes", STREAM_OUTCOMES),
    ]
    .into_iter()
    .map(|(name, stream)| (name.to_string(), split_seed(seed, stream, 0)))
    .collect()
}

/// Validate, compute and render. Deterministic in the config.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let diags = config.validate();
    if !diags.is_empty() {
        return Err(RunError::Config(diags));
    }
    let kind = config.kind().expect("validated");
    let started = Instant::now();
    let table = match kind {
        ExperimentKind::Pip => run_pip(config)?,
        ExperimentKind::HaarPip => run_haar_pip(config)?,
        ExperimentKind::Redundancy => run_redundancy(config)?,
        ExperimentKind::Ridge => run_ridge(config)?,
        ExperimentKind::Sieve => run_sieve(config)?,
        ExperimentKind::Envariance => run_envariance(config)?,
        ExperimentKind::Qbm => run_qbm(config)?,
    };
    let bytes = table.render(config.output_format, kind, config.seed);
    let manifest = RunManifest {
        tool: TOOL.into(),
        version: VERSION.into(),
        experiment: kind.name().into(),
        config: config.to_pairs(),
        seeds: stream_seeds(config.seed),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        output_path: config.output_path.clone(),
        output_format: config.output_format,
    };
    Ok(RunOutput { bytes, table, manifest })
}

/// Re-run the config echoed in a manifest.
pub fn replay(manifest: &RunManifest) -> Result<RunOutput, RunError> {
    let config = ExperimentConfig::from_pairs(&manifest.config).map_err(RunError::Config)?;
    run(&config)
}

const PIP_COLUMNS: [&str; 5] = ["m", "f", "I_mean_bits", "I_stddev_bits", "H_S_bits"];
const PLUS: [C64; 2] = [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0)];

fn pip_table(curve: &PipCurve) -> Table {
    let mut t = Table::new(&PIP_COLUMNS);
    t.meta("n_env", curve.n_env);
    t.meta("n_samples", curve.n_samples);
    for p in &curve.points {
        t.rows.push(vec![
            Cell::Int(p.m as u64),
            Cell::Float(p.f),
            Cell::Float(p.i_mean),
            Cell::Float(p.i_stddev),
            Cell::Float(curve.plateau),
        ]);
    }
    t
}

fn ising_couplings(config: &ExperimentConfig, n_env: usize) -> Result<CouplingSet, Error> {
    sample_couplings(n_env, config.seed)
}

fn run_pip(config: &ExperimentConfig) -> Result<Table, Error> {
    let couplings = ising_couplings(config, config.n_env)?.at_action(config.action)?;
    let state = ising_evolve(&couplings, PLUS)?;
    let mut t = pip_table(&pip_curve(&state, config.n_samples, config.seed)?);
    t.meta("action", format_g(config.action));
    Ok(t)
}

fn run_haar_pip(config: &ExperimentConfig) -> Result<Table, Error> {
    let curve = haar_pip(config.n_system, config.n_env, config.n_states, config.n_samples, config.seed)?;
    let mut t = pip_table(&curve);
    t.meta("n_system", config.n_system);
    t.meta("n_states", config.n_states);
    Ok(t)
}

fn run_redundancy(config: &ExperimentConfig) -> Result<Table, Error> {
    let mut t = Table::new(&["n_env", "action", "H_S_bits", "m_delta", "f_delta", "R_delta", "interpolated"]);
    t.meta("delta", format_g(config.delta));
    for n in config.env_sizes() {
        let base = ising_couplings(config, n)?;
        for a in config.actions() {
            let state = ising_evolve(&base.at_action(a)?, PLUS)?;
            let curve = pip_curve(&state, config.n_samples, config.seed)?;
            let row = match redundancy_from_curve(&curve, config.delta) {
                Ok(r) => vec![
                    Cell::Int(n as u64),
                    Cell::Float(a),
                    Cell::Float(r.h_s),
                    Cell::Float(r.m_delta),
                    Cell::Float(r.f_delta),
                    Cell::Float(r.r_delta),
                    Cell::Bool(r.interpolated),
                ],
                // no record to be redundant about at this action
                Err(Error::NoClassicalInformation(h)) => vec![
                    Cell::Int(n as u64),
                    Cell::Float(a),
                    Cell::Float(h),
                    Cell::Float(f64::NAN),
                    Cell::Float(f64::NAN),
                    Cell::Float(0.0),
                    Cell::Bool(false),
                ],
                Err(e) => return Err(e),
            };
            t.rows.push(row);
        }
    }
    Ok(t)
}

fn run_ridge(config: &ExperimentConfig) -> Result<Table, Error> {
    let couplings = ising_couplings(config, config.n_env)?;
    let scheme = match config.scheme.as_str() {
        "random" => MeasurementScheme::RandomBases { seed: split_seed(config.seed, STREAM_BASES, 0) },
        _ => MeasurementScheme::PerQubitOptimal,
    };
    let options = RidgeOptions {
        delta: config.delta,
        n_fragment_samples: config.n_samples,
        n_outcome_samples: config.n_outcome_samples,
        exact_limit: config.exact_limit,
        scheme,
    };
    let rows = redundancy_ridge(&couplings, &config.actions(), &config.mu_grid, &options, config.seed)?;
    let mut t = Table::new(&["mu", "action", "R_delta", "f_delta"]);
    t.meta("n_env", config.n_env);
    t.meta("delta", format_g(config.delta));
    t.meta("scheme", &config.scheme);
    for r in rows {
        t.rows.push(vec![Cell::Float(r.mu), Cell::Float(r.action), Cell::Float(r.r_delta), Cell::Float(r.f_delta)]);
    }
    Ok(t)
}

fn run_sieve(config: &ExperimentConfig) -> Result<Table, Error> {
    let couplings = ising_couplings(config, config.n_env)?;
    let times = if config.t_grid.is_empty() {
        config.actions().iter().map(|a| a / couplings.mean_g()).collect()
    } else {
        config.t_grid.clone()
    };
    let result = predictability_sieve(&couplings, &config.mu_grid, &times)?;
    let mut t = Table::new(&["mu", "t", "H_S_bits"]);
    t.meta("n_env", config.n_env);
    t.meta("ranking", result.ranking.iter().map(|i| format_g(config.mu_grid[*i])).collect::<Vec<_>>().join(";"));
    for traj in &result.trajectories {
        for (time, h) in traj.times.iter().zip(&traj.entropies) {
            t.rows.push(vec![Cell::Float(traj.mu), Cell::Float(*time), Cell::Float(*h)]);
        }
    }
    Ok(t)
}

fn run_envariance(config: &ExperimentConfig) -> Result<Table, Error> {
    let norm = config.amplitudes.iter().map(|a| a * a).sum::<f64>().sqrt();
    let amps: Vec<C64> = config.amplitudes.iter().map(|a| C64::new(a / norm, 0.0)).collect();
    let born = born_via_envariance(&amps, config.max_denominator)?;
    let mut t = Table::new(&["k", "amplitude_sq", "p_rational", "p"]);
    t.meta("denominator", born.denominator);
    t.meta("exact", born.exact);
    t.meta("executed_densely", born.executed_densely);
    for (k, (a, (r, p))) in amps.iter().zip(born.rationals.iter().zip(&born.probabilities)).enumerate() {
        t.rows.push(vec![
            Cell::Int(k as u64),
            Cell::Float(a.norm_sqr()),
            Cell::Text(format!("{}/{}", r.numer(), r.denom())),
            Cell::Float(*p),
        ]);
    }
    Ok(t)
}

fn run_qbm(config: &ExperimentConfig) -> Result<Table, Error> {
    let unit = if config.unit == "nats" { InfoUnit::Nats } else { InfoUnit::Bits };
    let params = QbmParams::new(config.h_s, unit, config.s, config.delta)?;
    let curve = qbm_mutual_information(&params, &config.f_grid)?;
    let mut t = Table::new(&["f", "I_bits", "clamped"]);
    t.meta("tag", ANALYTIC_TAG);
    t.meta("R_delta", format_g(qbm_redundancy(&params)));
    let to_bits = unit.to_bits();
    for p in &curve.points {
        t.rows.push(vec![Cell::Float(p.f), Cell::Float(p.value * to_bits), Cell::Bool(p.clamped)]);
    }
    Ok(t)
}
