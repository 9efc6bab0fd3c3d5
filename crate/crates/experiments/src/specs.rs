//! Textual specs for losses, prediction algorithms and pools.
//!
//! Algorithms: `const:P`, `laplace`, `power:K:EPS`, `table:PATH`.
//! Losses: a builtin name (`log`, `brier`, `spherical`), loss DSL text, or
//! `@PATH` naming a file of DSL text. On the command line a pool is a
//! `;`-separated list of algorithm specs, each optionally suffixed with
//! `=WEIGHT`; unweighted pools get uniform weights.

use std::path::Path;
use std::sync::Arc;

use lossgeom::{Algorithm, Builtin, Constant, ExpertPoolF64, Laplace, LossF64, PowerPredictor, TablePredictor};

use crate::config::PoolEntry;
use crate::error::{Result, RunError};

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| RunError::io(path, e))
}

pub fn parse_loss_spec(spec: &str, base_dir: &Path) -> Result<LossF64> {
    let spec = spec.trim();
    if let Some(kind) = Builtin::from_name(spec) {
        return Ok(LossF64::builtin(kind));
    }
    let text = match spec.strip_prefix('@') {
        Some(path) => read(&base_dir.join(path))?,
        None => spec.to_string(),
    };
    LossF64::parse(&text).map_err(RunError::config)
}

fn number<T: std::str::FromStr>(field: &str, what: &str, spec: &str) -> Result<T> {
    field.trim().parse().map_err(|_| RunError::Config(format!("bad {what} `{field}` in algorithm spec `{spec}`")))
}

pub fn parse_algorithm(spec: &str, base_dir: &Path) -> Result<Algorithm<f64>> {
    let spec = spec.trim();
    let (head, rest) = spec.split_once(':').unwrap_or((spec, ""));
    match head {
        "const" | "constant" => {
            let p: f64 = number(rest, "probability", spec)?;
            if !(0.0..=1.0).contains(&p) {
                return Err(RunError::Config(format!("constant prediction {p} outside [0, 1]")));
            }
            Ok(Arc::new(Constant(p)))
        }
        "laplace" if rest.is_empty() => Ok(Arc::new(Laplace)),
        "power" => {
            let (k, eps) =
                rest.split_once(':').ok_or_else(|| RunError::Config(format!("expected power:K:EPS, got `{spec}`")))?;
            let f =
                PowerPredictor::new(number(k, "k", spec)?, number(eps, "epsilon", spec)?).map_err(RunError::config)?;
            Ok(Arc::new(f))
        }
        "table" => {
            let text = read(&base_dir.join(rest))?;
            Ok(Arc::new(TablePredictor::parse(&text).map_err(RunError::config)?))
        }
        _ => Err(RunError::Config(format!("unknown algorithm spec `{spec}`"))),
    }
}

/// Parses the command-line pool syntax into config entries.
pub fn parse_pool_arg(text: &str) -> Result<Vec<PoolEntry>> {
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| match item.rsplit_once('=') {
            Some((alg, w)) => Ok(PoolEntry::Weighted {
                algorithm: alg.trim().to_string(),
                weight: w.trim().parse().map_err(|_| RunError::Config(format!("bad weight in `{item}`")))?,
            }),
            None => Ok(PoolEntry::Bare(item.to_string())),
        })
        .collect()
}

pub fn build_pool(entries: &[PoolEntry], base_dir: &Path) -> Result<ExpertPoolF64> {
    let weighted = entries.iter().filter(|e| matches!(e, PoolEntry::Weighted { .. })).count();
    if weighted != 0 && weighted != entries.len() {
        return Err(RunError::Config("either every pool member has a weight or none does".into()));
    }
    let mut experts = Vec::with_capacity(entries.len());
    let mut weights = Vec::with_capacity(entries.len());
    for entry in entries {
        match entry {
            PoolEntry::Bare(spec) => experts.push(parse_algorithm(spec, base_dir)?),
            PoolEntry::Weighted { algorithm, weight } => {
                experts.push(parse_algorithm(algorithm, base_dir)?);
                weights.push(*weight);
            }
        }
    }
    let pool = if weighted == 0 { ExpertPoolF64::uniform(experts) } else { ExpertPoolF64::new(experts, weights) };
    pool.map_err(RunError::config)
}

/// Short description of a pool for reports.
pub fn describe_pool(pool: &ExpertPoolF64) -> String {
    pool.experts().iter().zip(pool.weights()).map(|(e, w)| format!("{}={w}", e.name())).collect::<Vec<_>>().join(";")
}
