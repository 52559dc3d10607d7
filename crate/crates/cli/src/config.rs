//! Plain-text sectioned `key = value` run configuration.
//!
//! The format is deliberately dependency-free and diff-friendly so configs
//! can live next to experiment outputs. Unknown sections or keys are errors.

use std::path::{Path, PathBuf};

use folio_core::InstanceKind;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

/// Where instance data comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    /// Seeded in-process generators; no files touched.
    Synth,
    /// One or more dataset files in the native external layouts.
    Files(Vec<PathBuf>),
}

/// Synthetic-data generator parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub seed: u64,
    pub equity_assets: usize,
    pub equity_days: usize,
    pub betting_matchdays: usize,
    pub betting_matches_per_day: usize,
    pub betting_books: usize,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            seed: 7,
            equity_assets: 49,
            equity_days: 420,
            betting_matchdays: 30,
            betting_matches_per_day: 16,
            betting_books: 3,
        }
    }
}

/// One sparsifier selection in the config grammar.
#[derive(Debug, Clone, PartialEq)]
pub enum SparsifierToken {
    /// The penalized matrix, unsparsified.
    Dense,
    /// The penalty-free objective matrix, unsparsified.
    Objective,
    Threshold(f64),
    /// Threshold at the τ that retains exactly this many edges.
    ThresholdEdges(usize),
    TopK(usize),
    Knn(usize),
    Settlement,
    KnnResidual(usize, usize),
    SettlementResidual(usize),
}

impl std::fmt::Display for SparsifierToken {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SparsifierToken::Dense => write!(f, "dense"),
            SparsifierToken::Objective => write!(f, "objective"),
            SparsifierToken::Threshold(tau) => write!(f, "threshold:{tau}"),
            SparsifierToken::ThresholdEdges(e) => write!(f, "threshold_edges:{e}"),
            SparsifierToken::TopK(k) => write!(f, "topk:{k}"),
            SparsifierToken::Knn(k) => write!(f, "knn:{k}"),
            SparsifierToken::Settlement => write!(f, "settlement"),
            SparsifierToken::KnnResidual(k, r) => write!(f, "knn_residual:{k}:{r}"),
            SparsifierToken::SettlementResidual(r) => write!(f, "settlement_residual:{r}"),
        }
    }
}

impl SparsifierToken {
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || CliError::Config(format!("bad sparsifier spec '{s}'"));
        let usize_at = |i: usize| -> Result<usize> {
            parts.get(i).and_then(|p| p.parse().ok()).ok_or_else(bad)
        };
        let f64_at = |i: usize| -> Result<f64> {
            parts.get(i).and_then(|p| p.parse().ok()).ok_or_else(bad)
        };
        match (parts[0], parts.len()) {
            ("dense", 1) => Ok(SparsifierToken::Dense),
            ("objective", 1) => Ok(SparsifierToken::Objective),
            ("threshold", 2) => Ok(SparsifierToken::Threshold(f64_at(1)?)),
            ("threshold_edges", 2) => Ok(SparsifierToken::ThresholdEdges(usize_at(1)?)),
            ("topk", 2) => Ok(SparsifierToken::TopK(usize_at(1)?)),
            ("knn", 2) => Ok(SparsifierToken::Knn(usize_at(1)?)),
            ("settlement", 1) => Ok(SparsifierToken::Settlement),
            ("knn_residual", 3) => Ok(SparsifierToken::KnnResidual(usize_at(1)?, usize_at(2)?)),
            ("settlement_residual", 2) => {
                Ok(SparsifierToken::SettlementResidual(usize_at(1)?))
            }
            _ => Err(bad()),
        }
    }
}

/// Which sampler drives the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub kind: String,
    pub reads: u32,
    pub sweeps: usize,
    pub beta_start: f64,
    pub beta_end: f64,
    /// Rescale β by the sampled matrix's coupling magnitude.
    pub auto_beta: bool,
    pub restarts: u32,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            kind: "sa".into(),
            reads: 1000,
            sweeps: 1000,
            beta_start: 0.1,
            beta_end: 10.0,
            auto_beta: true,
            restarts: 128,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferencePolicy {
    /// Exact oracle when C(N,K) fits the budget, greedy-128 otherwise.
    Auto,
    /// Exact oracle, falling back to greedy with a flag when over budget.
    Exact,
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BacktestMethod {
    /// Objective-only sampling plus projection.
    PenaltyFree,
    Greedy,
}

/// Full harness run configuration.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub case: InstanceKind,
    pub source: DataSource,
    pub synth: SynthParams,
    /// (N, K) grid cells.
    pub pairs: Vec<(usize, usize)>,
    pub lambda: f64,
    pub penalty_a: f64,
    pub sparsifiers: Vec<SparsifierToken>,
    pub sampler: SamplerConfig,
    pub seeds: Vec<u64>,
    pub reference: ReferencePolicy,
    pub budget: u64,
    pub unconstrained_limit: usize,
    pub baselines: bool,
    pub random_trials: u32,
    pub threads: usize,
    pub out_dir: PathBuf,
    /// Slates taken per size for the ablation and betting backtest.
    pub slates_per_size: usize,
    pub backtest_method: BacktestMethod,
    pub window_days: usize,
    pub bootstrap_draws: u32,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            case: InstanceKind::Equity,
            source: DataSource::Synth,
            synth: SynthParams::default(),
            pairs: vec![(24, 8)],
            lambda: 1.0,
            penalty_a: 4.0,
            sparsifiers: vec![SparsifierToken::Dense],
            sampler: SamplerConfig::default(),
            seeds: vec![1],
            reference: ReferencePolicy::Auto,
            budget: 10_000_000,
            unconstrained_limit: 22,
            baselines: true,
            random_trials: 100,
            threads: 0,
            out_dir: PathBuf::from("out"),
            slates_per_size: 20,
            backtest_method: BacktestMethod::PenaltyFree,
            window_days: 252,
            bootstrap_draws: 1000,
        }
    }
}

impl PipelineConfig {
    pub fn from_file<P: AsRef<Path>>(path: P) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|source| CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = PipelineConfig::default();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') {
                section = line[1..line.len() - 1].trim().to_string();
                if !["data", "grid", "sparsifiers", "sampler", "run", "backtest"]
                    .contains(&section.as_str())
                {
                    return Err(CliError::Config(format!(
                        "unknown section [{section}] at line {}",
                        lineno + 1
                    )));
                }
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("expected 'key = value' at line {}", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            cfg.apply(&section, key, value).map_err(|e| {
                CliError::Config(format!("line {}: {e}", lineno + 1))
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, section: &str, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: std::str::FromStr>(value: &str, key: &str) -> std::result::Result<T, String> {
            value
                .parse()
                .map_err(|_| format!("bad value '{value}' for {key}"))
        }
        fn list(value: &str) -> Vec<&str> {
            value
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .collect()
        }
        match (section, key) {
            ("data", "case") => {
                self.case = match value {
                    "equity" => InstanceKind::Equity,
                    "betting" => InstanceKind::Betting,
                    _ => return Err(format!("case must be equity|betting, got '{value}'")),
                }
            }
            ("data", "source") => {
                self.source = if value == "synth" {
                    DataSource::Synth
                } else {
                    DataSource::Files(list(value).into_iter().map(PathBuf::from).collect())
                }
            }
            ("data", "synth_seed") => self.synth.seed = num(value, key)?,
            ("data", "synth_assets") => self.synth.equity_assets = num(value, key)?,
            ("data", "synth_days") => self.synth.equity_days = num(value, key)?,
            ("data", "synth_matchdays") => self.synth.betting_matchdays = num(value, key)?,
            ("data", "synth_matches_per_day") => {
                self.synth.betting_matches_per_day = num(value, key)?
            }
            ("data", "synth_books") => self.synth.betting_books = num(value, key)?,
            ("grid", "pairs") => {
                let mut pairs = Vec::new();
                for item in list(value) {
                    let (n, k) = item
                        .split_once(':')
                        .ok_or_else(|| format!("pair '{item}' is not N:K"))?;
                    pairs.push((num(n, "N")?, num(k, "K")?));
                }
                self.pairs = pairs;
            }
            ("grid", "lambda") => self.lambda = num(value, key)?,
            ("grid", "penalty_a") => self.penalty_a = num(value, key)?,
            ("sparsifiers", "specs") => {
                let mut specs = Vec::new();
                for item in list(value) {
                    specs.push(SparsifierToken::parse(item).map_err(|e| e.to_string())?);
                }
                // an empty list means the dense (unsparsified) rows only
                if specs.is_empty() {
                    specs.push(SparsifierToken::Dense);
                }
                self.sparsifiers = specs;
            }
            ("sampler", "kind") => {
                folio_core::sampler::sampler_kind_from_name(value).map_err(|e| e.to_string())?;
                self.kind_mut(value);
            }
            ("sampler", "reads") => self.sampler.reads = num(value, key)?,
            ("sampler", "sweeps") => self.sampler.sweeps = num(value, key)?,
            ("sampler", "beta_start") => self.sampler.beta_start = num(value, key)?,
            ("sampler", "beta_end") => self.sampler.beta_end = num(value, key)?,
            ("sampler", "auto_beta") => self.sampler.auto_beta = parse_bool(value)?,
            ("sampler", "restarts") => self.sampler.restarts = num(value, key)?,
            ("run", "seeds") => {
                let mut seeds = Vec::new();
                for item in list(value) {
                    seeds.push(num(item, "seed")?);
                }
                self.seeds = seeds;
            }
            ("run", "reference") => {
                self.reference = match value {
                    "auto" => ReferencePolicy::Auto,
                    "exact" => ReferencePolicy::Exact,
                    "greedy" => ReferencePolicy::Greedy,
                    _ => return Err(format!("reference must be auto|exact|greedy, got '{value}'")),
                }
            }
            ("run", "budget") => self.budget = num(value, key)?,
            ("run", "unconstrained_limit") => self.unconstrained_limit = num(value, key)?,
            ("run", "baselines") => self.baselines = parse_bool(value)?,
            ("run", "random_trials") => self.random_trials = num(value, key)?,
            ("run", "threads") => self.threads = num(value, key)?,
            ("run", "out") => self.out_dir = PathBuf::from(value),
            ("run", "slates_per_size") => self.slates_per_size = num(value, key)?,
            ("backtest", "method") => {
                self.backtest_method = match value {
                    "penalty_free" => BacktestMethod::PenaltyFree,
                    "greedy" => BacktestMethod::Greedy,
                    _ => {
                        return Err(format!(
                            "method must be penalty_free|greedy, got '{value}'"
                        ))
                    }
                }
            }
            ("backtest", "window_days") => self.window_days = num(value, key)?,
            ("backtest", "bootstrap_draws") => self.bootstrap_draws = num(value, key)?,
            _ => return Err(format!("unknown key '{key}' in section [{section}]")),
        }
        Ok(())
    }

    fn kind_mut(&mut self, value: &str) {
        self.sampler.kind = value.to_string();
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(CliError::Config("seeds must be non-empty".into()));
        }
        if self.pairs.is_empty() {
            return Err(CliError::Config("grid pairs must be non-empty".into()));
        }
        for &(n, k) in &self.pairs {
            if n == 0 || k == 0 || k > n {
                return Err(CliError::Config(format!("bad grid pair {n}:{k}")));
            }
            if self.case == InstanceKind::Betting && n % 3 != 0 {
                return Err(CliError::Config(format!(
                    "betting N must be a multiple of 3, got {n}"
                )));
            }
        }
        for tok in &self.sparsifiers {
            let settlement = matches!(
                tok,
                SparsifierToken::Settlement | SparsifierToken::SettlementResidual(_)
            );
            if settlement && self.case != InstanceKind::Betting {
                return Err(CliError::Config(format!(
                    "sparsifier '{tok}' requires the betting case"
                )));
            }
            if self.penalty_a == 0.0 && *tok != SparsifierToken::Objective {
                return Err(CliError::Config(format!(
                    "sparsifier '{tok}' needs penalty_a > 0"
                )));
            }
        }
        if let DataSource::Files(paths) = &self.source {
            if paths.is_empty() {
                return Err(CliError::Config("source file list is empty".into()));
            }
            for p in paths {
                if !p.exists() {
                    return Err(CliError::Config(format!(
                        "referenced file does not exist: {}",
                        p.display()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Stable digest of everything that determines a run's outputs.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(format!("{self:?}"));
        if let DataSource::Files(paths) = &self.source {
            for p in paths {
                if let Ok(bytes) = std::fs::read(p) {
                    hasher.update(&bytes);
                }
            }
        }
        hex_string(&hasher.finalize())
    }
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn parse_bool(value: &str) -> std::result::Result<bool, String> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(format!("bad boolean '{value}'")),
    }
}
