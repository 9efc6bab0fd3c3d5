//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "experiment": "deficiency",
//!   "loss": "brier",
//!   "algorithm": "laplace",
//!   "pool": ["const:0", {"algorithm": "const:1", "weight": 0.5}],
//!   "data": "labels.txt",
//!   "horizon": 1000,
//!   "epsilon": 0.1,
//!   "output": "out"
//! }
//! ```
//!
//! Relative paths are resolved against the directory of the config file.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Result, RunError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Analyze,
    Theorem2,
    Deficiency,
    CompareTruncated,
    Selftest,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Analyze => "analyze",
            ExperimentKind::Theorem2 => "theorem2",
            ExperimentKind::Deficiency => "deficiency",
            ExperimentKind::CompareTruncated => "compare-truncated",
            ExperimentKind::Selftest => "selftest",
        }
    }
}

/// One pool member: an algorithm spec, optionally with its prior weight.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum PoolEntry {
    Bare(String),
    Weighted { algorithm: String, weight: f64 },
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentKind>,
    /// Builtin name, loss DSL text, or `@path` to a DSL file.
    pub loss: Option<String>,
    /// Second loss for truncation comparisons.
    pub loss2: Option<String>,
    pub algorithm: Option<String>,
    pub pool: Option<Vec<PoolEntry>>,
    pub data: Option<PathBuf>,
    pub horizon: Option<usize>,
    pub epsilon: Option<f64>,
    pub eta: Option<f64>,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_json(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut cfg: ExperimentConfig = serde_json::from_str(text).map_err(RunError::config)?;
        cfg.base_dir = base_dir.into();
        if let Some(data) = cfg.data.take() {
            cfg.data = Some(cfg.resolve(&data));
        }
        if let Some(out) = cfg.output.take() {
            cfg.output = Some(cfg.resolve(&out));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&text, base)
    }

    /// `path` relative to the config file's directory (absolute paths pass
    /// through).
    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() || self.base_dir.as_os_str().is_empty() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    /// Checks invariants that do not depend on the experiment kind.
    pub fn validate(&self) -> Result<()> {
        if self.horizon == Some(0) {
            return Err(RunError::Config("horizon must be at least 1".into()));
        }
        if let Some(data) = &self.data {
            if !data.is_file() {
                return Err(RunError::Config(format!("data file {} does not exist", data.display())));
            }
        }
        Ok(())
    }
}
