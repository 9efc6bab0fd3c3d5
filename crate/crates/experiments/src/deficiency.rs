//! Pool-relative randomness deficiency of a labelled sequence.

use lossgeom::{
    aa_mixture, cumulative_loss, mixability_constant, randomness_verdict, Algorithm, DataSequence, DeficiencyTraceF64,
    ExpertPoolF64, LossF64, Verdict,
};
use serde::Serialize;

use crate::error::{Result, RunError};
use crate::output::{thinned_steps, Outputs, Table, VerdictFields};
use crate::specs::describe_pool;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeficiencyReport {
    pub loss: String,
    pub algorithm: String,
    pub pool: String,
    /// Deficiencies are relative to the pool, not to true predictive
    /// complexity.
    pub relative_to: &'static str,
    pub eta: f64,
    pub horizon: usize,
    pub final_loss_f: f64,
    pub final_mixture_loss: f64,
    pub final_deficiency: f64,
    #[serde(flatten)]
    pub verdict_fields: VerdictFields,
    #[serde(skip)]
    pub verdict: Verdict<f64>,
    #[serde(skip)]
    pub trace: DeficiencyTraceF64,
}

/// `eta`, or the loss's mixability constant when not given.
pub fn default_eta(lf: &LossF64, eta: Option<f64>) -> Result<f64> {
    match eta {
        Some(e) => Ok(e),
        None => mixability_constant(lf)?
            .kind
            .value()
            .ok_or_else(|| RunError::Invariant(format!("{} has no finite mixability constant", lf.name()))),
    }
}

pub fn run_deficiency(
    lf: &LossF64,
    f: &Algorithm<f64>,
    pool: &ExpertPoolF64,
    eta: Option<f64>,
    sigma: &DataSequence,
) -> Result<DeficiencyReport> {
    if sigma.is_empty() {
        return Err(RunError::Config("data sequence is empty".into()));
    }
    let eta = default_eta(lf, eta)?;
    let mixture = aa_mixture(pool, lf, eta, sigma)?;
    let loss = cumulative_loss(f.as_ref(), sigma, lf);
    let trace = DeficiencyTraceF64::from_traces(&loss, &mixture)?;
    let verdict = randomness_verdict(&trace);
    Ok(DeficiencyReport {
        loss: lf.name().to_string(),
        algorithm: f.name(),
        pool: describe_pool(pool),
        relative_to: "pool",
        eta,
        horizon: sigma.len(),
        final_loss_f: loss.final_loss(),
        final_mixture_loss: mixture.final_value(),
        final_deficiency: trace.final_value(),
        verdict_fields: VerdictFields::new(&verdict),
        verdict,
        trace,
    })
}

pub fn deficiency_table(trace: &DeficiencyTraceF64) -> Table {
    let mut table = Table::new(vec!["T", "loss_F", "mixture_loss", "deficiency"]);
    for t in thinned_steps(trace.horizon()) {
        table.push(vec![t as f64, trace.loss_f[t], trace.mixture[t], trace.values[t]]);
    }
    table
}

pub fn cmd_deficiency(
    lf: &LossF64,
    f: &Algorithm<f64>,
    pool: &ExpertPoolF64,
    eta: Option<f64>,
    sigma: &DataSequence,
    outputs: &mut Outputs,
) -> Result<DeficiencyReport> {
    let report = run_deficiency(lf, f, pool, eta, sigma)?;
    outputs.add_json("report.json", &report);
    outputs.add("deficiency.csv", deficiency_table(&report.trace).to_csv());
    Ok(report)
}
