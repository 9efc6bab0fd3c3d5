//! Truncated losses and the factor within which their deficiencies agree.

use std::sync::Arc;

use lossgeom::{
    aa_mixture, cumulative_loss, equivalence_factor, fit_dominance, mixability_constant, Algorithm, Clamped, Constant,
    DataSequence, DeficiencyTraceF64, DominanceReport, ExpertPoolF64, LossF64, Outcome,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Result, RunError};
use crate::output::{thinned_steps, Outputs, Table};
use crate::specs::describe_pool;
use crate::theorem2::{CONSTANT_FIT_FRACTION, INEQUALITY_FROM};

pub const DEFAULT_HORIZON: usize = 10_000;
pub const DEFAULT_BIAS: f64 = 0.8;
pub const DEFAULT_PREDICTION: f64 = 0.3;

/// Labels drawn independently with `P(1) = bias` from a seeded generator.
pub fn bernoulli_sequence(len: usize, bias: f64, seed: u64) -> DataSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DataSequence::from_labels((0..len).map(|_| if rng.gen_bool(bias) { Outcome::One } else { Outcome::Zero }))
}

/// The pool of constant predictions `0.1, 0.2, …, 0.9` with equal weights.
pub fn default_pool() -> ExpertPoolF64 {
    let experts: Vec<Algorithm<f64>> = (1..=9).map(|i| Arc::new(Constant(i as f64 / 10.0)) as Algorithm<f64>).collect();
    ExpertPoolF64::uniform(experts).expect("nonempty pool")
}

/// The algorithm, pool and data whose deficiencies are compared.
pub struct Triple {
    pub algorithm: Algorithm<f64>,
    pub pool: ExpertPoolF64,
    pub data: DataSequence,
    pub data_source: String,
}

impl Triple {
    pub fn default_with(horizon: usize, seed: u64) -> Self {
        Triple {
            algorithm: Arc::new(Constant(DEFAULT_PREDICTION)),
            pool: default_pool(),
            data: bernoulli_sequence(horizon, DEFAULT_BIAS, seed),
            data_source: format!("bernoulli({DEFAULT_BIAS}) seed {seed}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareReport {
    pub loss: String,
    pub loss2: String,
    pub epsilon: f64,
    pub factor: f64,
    pub algorithm: String,
    pub pool: String,
    pub data: String,
    pub horizon: usize,
    pub eta: f64,
    pub eta2: f64,
    pub final_deficiency: f64,
    pub final_deficiency2: f64,
    /// `D^λ ≤ factor·D^Λ + c`.
    pub forward_constant: f64,
    pub forward_worst_excess: f64,
    pub forward_holds: bool,
    /// `D^Λ ≤ factor·D^λ + c`.
    pub backward_constant: f64,
    pub backward_worst_excess: f64,
    pub backward_holds: bool,
    #[serde(skip)]
    pub deficiency: DeficiencyTraceF64,
    #[serde(skip)]
    pub deficiency2: DeficiencyTraceF64,
}

fn clamp(f: &Algorithm<f64>, eps: f64) -> Algorithm<f64> {
    Arc::new(Clamped::new(f.clone(), eps))
}

fn clamped_deficiency(lf: &LossF64, triple: &Triple, eps: f64) -> Result<(f64, DeficiencyTraceF64)> {
    let truncated = lf.truncate(eps)?;
    let eta = mixability_constant(&truncated)?
        .kind
        .value()
        .ok_or_else(|| RunError::Invariant(format!("{} has no finite mixability constant", truncated.name())))?;
    let experts: Vec<Algorithm<f64>> = triple.pool.experts().iter().map(|e| clamp(e, eps)).collect();
    let pool = ExpertPoolF64::new(experts, triple.pool.weights().to_vec())?;
    let mixture = aa_mixture(&pool, &truncated, eta, &triple.data)?;
    let loss = cumulative_loss(clamp(&triple.algorithm, eps).as_ref(), &triple.data, &truncated);
    Ok((eta, DeficiencyTraceF64::from_traces(&loss, &mixture)?))
}

fn dominance(lhs: &DeficiencyTraceF64, rhs: &DeficiencyTraceF64, factor: f64) -> DominanceReport<f64> {
    let scaled: Vec<f64> = rhs.values.iter().map(|d| factor * d).collect();
    let fit_until = ((lhs.horizon() as f64 * CONSTANT_FIT_FRACTION) as usize).max(INEQUALITY_FROM);
    fit_dominance(&lhs.values, &scaled, INEQUALITY_FROM, fit_until)
}

pub fn compare_truncated(lf: &LossF64, lg: &LossF64, eps: f64, triple: &Triple) -> Result<CompareReport> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(RunError::Config(format!("eps = {eps} must lie in (0, 0.5)")));
    }
    if triple.data.is_empty() {
        return Err(RunError::Config("data sequence is empty".into()));
    }
    let factor = equivalence_factor(lf, lg, eps)?;
    let (eta, d1) = clamped_deficiency(lf, triple, eps)?;
    let (eta2, d2) = clamped_deficiency(lg, triple, eps)?;
    let forward = dominance(&d1, &d2, factor);
    let backward = dominance(&d2, &d1, factor);
    Ok(CompareReport {
        loss: lf.name().to_string(),
        loss2: lg.name().to_string(),
        epsilon: eps,
        factor,
        algorithm: triple.algorithm.name(),
        pool: describe_pool(&triple.pool),
        data: triple.data_source.clone(),
        horizon: triple.data.len(),
        eta,
        eta2,
        final_deficiency: d1.final_value(),
        final_deficiency2: d2.final_value(),
        forward_constant: forward.constant,
        forward_worst_excess: forward.worst_excess,
        forward_holds: forward.holds,
        backward_constant: backward.constant,
        backward_worst_excess: backward.worst_excess,
        backward_holds: backward.holds,
        deficiency: d1,
        deficiency2: d2,
    })
}

pub fn compare_table(report: &CompareReport) -> Table {
    let mut table = Table::new(vec!["T", "deficiency_1", "deficiency_2"]);
    for t in thinned_steps(report.horizon) {
        table.push(vec![t as f64, report.deficiency.values[t], report.deficiency2.values[t]]);
    }
    table
}

pub fn cmd_compare_truncated(
    lf: &LossF64,
    lg: &LossF64,
    eps: f64,
    triple: &Triple,
    outputs: &mut Outputs,
) -> Result<CompareReport> {
    let report = compare_truncated(lf, lg, eps, triple)?;
    outputs.add_json("report.json", &report);
    outputs.add("compare.csv", compare_table(&report).to_csv());
    if !(report.forward_holds && report.backward_holds) {
        return Err(RunError::Invariant(format!(
            "deficiencies under {} and {} differ by more than the factor {} plus a constant",
            report.loss, report.loss2, report.factor
        )));
    }
    Ok(report)
}
