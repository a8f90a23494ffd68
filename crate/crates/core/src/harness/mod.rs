//! Experiment configuration, dispatch and persistence.
//!
//! A run is fully determined by its [`ExperimentConfig`]: replica `r` of arm
//! `a` always uses `seed.derive(a).derive(r)`, whichever thread runs it.

mod experiments;

pub use experiments::triangle;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid_param, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    CouplingForest,
    StarEquivalence,
    LsScaling,
    PoissonBounds,
    MarkDensity,
    TheoremMain,
    LimitMoments,
    RealizeRoundtrip,
    FullSupport,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::CouplingForest,
        Experiment::StarEquivalence,
        Experiment::LsScaling,
        Experiment::PoissonBounds,
        Experiment::MarkDensity,
        Experiment::TheoremMain,
        Experiment::LimitMoments,
        Experiment::RealizeRoundtrip,
        Experiment::FullSupport,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::CouplingForest => "coupling-forest",
            Experiment::StarEquivalence => "star-equivalence",
            Experiment::LsScaling => "ls-scaling",
            Experiment::PoissonBounds => "poissonbounds",
            Experiment::MarkDensity => "mark-density",
            Experiment::TheoremMain => "theorem-main",
            Experiment::LimitMoments => "limit-moments",
            Experiment::RealizeRoundtrip => "realize-roundtrip",
            Experiment::FullSupport => "full-support",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::UnknownExperiment(s.to_string()))
    }
}

/// Parameters of one experiment run. Anything left unset takes the
/// experiment's default; `seed` is mandatory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Vertex count (for star-equivalence: the largest tree size).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Excursion lengths.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<f64>>,
    /// Horizons of the drift path.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<Vec<f64>>,
    /// Grid step of the drift path.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    /// Grid size of sampled excursions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    /// Proposal pool for area-tilted excursions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool: Option<usize>,
    /// Replicas per arm.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicas: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top_k: Option<usize>,
    /// Monte Carlo size for the mean excursion area.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area_samples: Option<usize>,
    /// Histogram bins.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, seed: u64) -> Self {
        ExperimentConfig {
            experiment: experiment.name().to_string(),
            seed,
            out: None,
            n: None,
            lambda: None,
            gamma: None,
            sigma: None,
            horizon: None,
            step: None,
            grid: None,
            pool: None,
            replicas: None,
            top_k: None,
            area_samples: None,
            bins: None,
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        Ok(toml::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    pub fn kind(&self) -> Result<Experiment> {
        self.experiment.parse()
    }

    pub(crate) fn count(&self, v: Option<usize>, default: usize, what: &str, min: usize) -> Result<usize> {
        let v = v.unwrap_or(default);
        if v < min {
            return Err(invalid_param(format!("{what} must be at least {min}, got {v}")));
        }
        Ok(v)
    }

    pub(crate) fn replicas(&self, default: usize) -> Result<usize> {
        self.count(self.replicas, default, "replicas", 1)
    }

    pub(crate) fn positive(&self, v: Option<f64>, default: f64, what: &str) -> Result<f64> {
        let v = v.unwrap_or(default);
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid_param(format!("{what} must be positive, got {v}")));
        }
        Ok(v)
    }

    pub(crate) fn finite(&self, v: Option<f64>, default: f64, what: &str) -> Result<f64> {
        let v = v.unwrap_or(default);
        if !v.is_finite() {
            return Err(invalid_param(format!("{what} must be finite, got {v}")));
        }
        Ok(v)
    }

    pub(crate) fn list(&self, v: &Option<Vec<f64>>, default: &[f64], what: &str) -> Result<Vec<f64>> {
        let v = v.clone().unwrap_or_else(|| default.to_vec());
        if v.is_empty() || v.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            return Err(invalid_param(format!("{what} must be a nonempty list of positive numbers")));
        }
        Ok(v)
    }
}

/// Outcome of a run: the configuration echo, one row per replica and the
/// summary statistics.
#[derive(Debug, Clone, Serialize)]
pub struct ResultRecord {
    pub experiment: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub columns: Vec<String>,
    #[serde(skip)]
    pub rows: Vec<Vec<f64>>,
    pub replica_count: usize,
    pub summary: BTreeMap<String, f64>,
}

impl ResultRecord {
    pub(crate) fn new(config: &ExperimentConfig, columns: &[&str]) -> Self {
        ResultRecord {
            experiment: config.experiment.clone(),
            seed: config.seed,
            config: config.clone(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            replica_count: 0,
            summary: BTreeMap::new(),
        }
    }

    pub(crate) fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
        self.replica_count = self.rows.len();
    }

    pub(crate) fn set(&mut self, key: impl Into<String>, value: f64) {
        self.summary.insert(key.into(), value);
    }

    /// Summary value by key; panics on a missing key.
    pub fn get(&self, key: &str) -> f64 {
        match self.summary.get(key) {
            Some(v) => *v,
            None => panic!("no summary entry `{key}` in {}", self.experiment),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    /// Writes `summary.json` and `replicas.csv` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut json = serde_json::to_string_pretty(self)?;
        json.push('\n');
        fs::write(dir.join("summary.json"), json)?;
        let mut csv = Vec::new();
        self.write_csv(&mut csv)?;
        fs::write(dir.join("replicas.csv"), csv)?;
        Ok(())
    }
}

/// Runs the configured experiment and, if `out` is set, writes its files.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultRecord> {
    let record = match cfg.kind()? {
        Experiment::CouplingForest => experiments::coupling_forest(cfg),
        Experiment::StarEquivalence => experiments::star_equivalence(cfg),
        Experiment::LsScaling => experiments::ls_scaling(cfg),
        Experiment::PoissonBounds => experiments::poisson_bounds(cfg),
        Experiment::MarkDensity => experiments::mark_density(cfg),
        Experiment::TheoremMain => experiments::theorem_main(cfg),
        Experiment::LimitMoments => experiments::limit_moments(cfg),
        Experiment::RealizeRoundtrip => experiments::realize_roundtrip(cfg),
        Experiment::FullSupport => experiments::full_support(cfg),
    }?;
    if let Some(dir) = &cfg.out {
        record.write_to(dir)?;
    }
    Ok(record)
}
