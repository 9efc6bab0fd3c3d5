//! Dispatch from an experiment kind and merged configuration to a command.

use std::path::Path;

use lossgeom::{DataSequence, LossF64};

use crate::analyze::cmd_analyze;
use crate::compare::{cmd_compare_truncated, default_pool, Triple, DEFAULT_HORIZON, DEFAULT_PREDICTION};
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::deficiency::cmd_deficiency;
use crate::error::{Result, RunError};
use crate::output::Outputs;
use crate::selftest::cmd_selftest;
use crate::specs::{build_pool, parse_algorithm, parse_loss_spec};
use crate::theorem2::cmd_theorem2;

pub const DEFAULT_THEOREM2_HORIZON: usize = 1_000_000;
pub const DEFAULT_EPSILON: f64 = 0.1;

fn required<'a, T>(value: &'a Option<T>, what: &str, kind: ExperimentKind) -> Result<&'a T> {
    value.as_ref().ok_or_else(|| RunError::Config(format!("{} needs a {what}", kind.name())))
}

fn loss(cfg: &ExperimentConfig, spec: &Option<String>, what: &str, kind: ExperimentKind) -> Result<LossF64> {
    parse_loss_spec(required(spec, what, kind)?, &cfg.base_dir)
}

fn load_data(path: &Path, horizon: Option<usize>) -> Result<DataSequence> {
    let text = std::fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
    let data = DataSequence::parse(&text).map_err(RunError::config)?;
    match horizon {
        None => Ok(data),
        Some(t) if t <= data.len() => Ok(DataSequence::new(data.object_space(), data.prefix(t).to_vec())?),
        Some(t) => {
            Err(RunError::Config(format!("horizon {t} exceeds the {} labels in {}", data.len(), path.display())))
        }
    }
}

/// Runs one experiment, queueing its files in `outputs`. The report is
/// queued before any invariant failure is returned.
pub fn execute(kind: ExperimentKind, cfg: &ExperimentConfig, outputs: &mut Outputs) -> Result<()> {
    if let Some(declared) = cfg.experiment {
        if declared != kind {
            return Err(RunError::Config(format!(
                "config declares experiment `{}` but `{}` was requested",
                declared.name(),
                kind.name()
            )));
        }
    }
    cfg.validate()?;
    let eps = cfg.epsilon.unwrap_or(DEFAULT_EPSILON);
    match kind {
        ExperimentKind::Analyze => {
            cmd_analyze(&loss(cfg, &cfg.loss, "loss", kind)?, outputs)?;
        }
        ExperimentKind::Theorem2 => {
            let lf = loss(cfg, &cfg.loss, "loss", kind)?;
            cmd_theorem2(&lf, eps, cfg.horizon.unwrap_or(DEFAULT_THEOREM2_HORIZON), outputs)?;
        }
        ExperimentKind::Deficiency => {
            let lf = loss(cfg, &cfg.loss, "loss", kind)?;
            let f = parse_algorithm(required(&cfg.algorithm, "algorithm", kind)?, &cfg.base_dir)?;
            let pool = build_pool(required(&cfg.pool, "pool", kind)?, &cfg.base_dir)?;
            let sigma = load_data(required(&cfg.data, "data file", kind)?, cfg.horizon)?;
            cmd_deficiency(&lf, &f, &pool, cfg.eta, &sigma, outputs)?;
        }
        ExperimentKind::CompareTruncated => {
            let lf = loss(cfg, &cfg.loss, "loss", kind)?;
            let lg = loss(cfg, &cfg.loss2, "second loss", kind)?;
            let mut triple = match &cfg.data {
                Some(path) => Triple {
                    algorithm: parse_algorithm(&format!("const:{DEFAULT_PREDICTION}"), &cfg.base_dir)?,
                    pool: default_pool(),
                    data: load_data(path, cfg.horizon)?,
                    data_source: path.display().to_string(),
                },
                None => Triple::default_with(cfg.horizon.unwrap_or(DEFAULT_HORIZON), cfg.seed.unwrap_or(0)),
            };
            if let Some(spec) = &cfg.algorithm {
                triple.algorithm = parse_algorithm(spec, &cfg.base_dir)?;
            }
            if let Some(entries) = &cfg.pool {
                triple.pool = build_pool(entries, &cfg.base_dir)?;
            }
            cmd_compare_truncated(&lf, &lg, eps, &triple, outputs)?;
        }
        ExperimentKind::Selftest => {
            cmd_selftest(outputs)?;
        }
    }
    Ok(())
}
