//! The power-predictor experiment: a sequence of zeros that is random under
//! a loss of degree `k ≥ 2` but not under the log loss.
//!
//! `F` predicts `p_t = (t + 1)^{−1/k−ε}` on an all-zero sequence and the
//! pool is the single constant-zero expert. Under a degree-`k` loss the
//! per-step losses behave like `p_t^k`, a convergent series, while the log
//! loss `−ln(1 − p_t) ≈ p_t` diverges like `T^{1−1/k−ε}`.

use std::sync::Arc;

use lossgeom::geometry::MAX_NUMERIC_ORDER;
use lossgeom::{
    deficiency, degree, fit_dominance, mixability_constant, randomness_verdict, Constant, DataSequence,
    DeficiencyTraceF64, Degree, DominanceReport, ExpertPoolF64, LossF64, PowerPredictor, Verdict,
};
use serde::Serialize;

use crate::error::{Result, RunError};
use crate::output::{thinned_steps, Outputs, Table, VerdictFields};

/// First step from which the deficiency inequality is checked.
pub const INEQUALITY_FROM: usize = 10;
/// Fraction of the horizon used to fit the additive constant.
pub const CONSTANT_FIT_FRACTION: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Theorem2Report {
    pub loss: String,
    pub degree: u32,
    pub epsilon: f64,
    pub horizon: usize,
    pub eta: f64,
    pub pool: String,
    pub final_loss_lf: f64,
    pub final_loss_log: f64,
    pub final_deficiency_lf: f64,
    pub final_deficiency_log: f64,
    pub verdict_lf: String,
    pub verdict_log: String,
    pub growth_exponent: Option<f64>,
    pub growth_amplitude: Option<f64>,
    pub growth_t_lo: Option<usize>,
    pub growth_t_hi: Option<usize>,
    pub growth_residual: Option<f64>,
    pub predicted_exponent: f64,
    pub predicted_amplitude: f64,
    pub amplitude_ratio: Option<f64>,
    /// Fitted `c` in `η·D^λ(T) ≤ D^ln(T) + c`.
    pub inequality_constant: f64,
    pub inequality_worst_excess: f64,
    pub inequality_holds: bool,
    #[serde(skip)]
    pub lf_verdict: Verdict<f64>,
    #[serde(skip)]
    pub log_verdict: Verdict<f64>,
    #[serde(skip)]
    pub deficiency_lf: DeficiencyTraceF64,
    #[serde(skip)]
    pub deficiency_log: DeficiencyTraceF64,
}

pub fn theorem2(lf: &LossF64, epsilon: f64, horizon: usize) -> Result<Theorem2Report> {
    if horizon == 0 {
        return Err(RunError::Config("horizon must be at least 1".into()));
    }
    let k = match degree(lf, MAX_NUMERIC_ORDER)?.degree {
        Degree::Finite(k) if k >= 2 => k,
        d => {
            return Err(RunError::Config(format!(
                "{} has degree {d}; the experiment needs a finite degree k >= 2",
                lf.name()
            )))
        }
    };
    let kf = k as f64;
    if !(epsilon > 0.0 && epsilon < 1.0 - 1.0 / kf) {
        return Err(RunError::Config(format!("epsilon = {epsilon} must lie in (0, {})", 1.0 - 1.0 / kf)));
    }
    let eta = mixability_constant(lf)?
        .kind
        .value()
        .ok_or_else(|| RunError::Invariant(format!("{} has no finite mixability constant", lf.name())))?;
    let f = PowerPredictor::new(k, epsilon)?;
    let pool = ExpertPoolF64::uniform(vec![Arc::new(Constant(0.0))])?;
    let sigma = DataSequence::zeros(horizon);
    let log = LossF64::log();

    let d_lf = deficiency(&f, &pool, lf, eta, &sigma)?;
    let d_log = deficiency(&f, &pool, &log, 1.0, &sigma)?;
    let lf_verdict = randomness_verdict(&d_lf);
    let log_verdict = randomness_verdict(&d_log);
    let inequality = inequality_report(eta, &d_lf, &d_log);

    let predicted_exponent = 1.0 - 1.0 / kf - epsilon;
    let predicted_amplitude = kf / (kf - 1.0 - kf * epsilon);
    let fields = VerdictFields::new(&log_verdict);
    Ok(Theorem2Report {
        loss: lf.name().to_string(),
        degree: k,
        epsilon,
        horizon,
        eta,
        pool: "const:0".into(),
        final_loss_lf: *d_lf.loss_f.last().unwrap(),
        final_loss_log: *d_log.loss_f.last().unwrap(),
        final_deficiency_lf: d_lf.final_value(),
        final_deficiency_log: d_log.final_value(),
        verdict_lf: VerdictFields::new(&lf_verdict).verdict,
        verdict_log: fields.verdict,
        growth_exponent: fields.growth_exponent,
        growth_amplitude: fields.growth_amplitude,
        growth_t_lo: fields.growth_t_lo,
        growth_t_hi: fields.growth_t_hi,
        growth_residual: fields.growth_residual,
        predicted_exponent,
        predicted_amplitude,
        amplitude_ratio: fields.growth_amplitude.map(|a| a / predicted_amplitude),
        inequality_constant: inequality.constant,
        inequality_worst_excess: inequality.worst_excess,
        inequality_holds: inequality.holds,
        lf_verdict,
        log_verdict,
        deficiency_lf: d_lf,
        deficiency_log: d_log,
    })
}

/// Checks `η·D^λ(T) ≤ D^ln(T) + c` for `T ≥ 10`, with `c` fitted on the
/// first tenth of the horizon.
pub fn inequality_report(eta: f64, d_lf: &DeficiencyTraceF64, d_log: &DeficiencyTraceF64) -> DominanceReport<f64> {
    let scaled: Vec<f64> = d_lf.values.iter().map(|d| eta * d).collect();
    let fit_until = ((d_lf.horizon() as f64 * CONSTANT_FIT_FRACTION) as usize).max(INEQUALITY_FROM);
    fit_dominance(&scaled, &d_log.values, INEQUALITY_FROM, fit_until)
}

pub fn theorem2_table(report: &Theorem2Report) -> Table {
    let mut table = Table::new(vec!["T", "loss_lf", "loss_log", "deficiency_lf", "deficiency_log"]);
    for t in thinned_steps(report.horizon) {
        table.push(vec![
            t as f64,
            report.deficiency_lf.loss_f[t],
            report.deficiency_log.loss_f[t],
            report.deficiency_lf.values[t],
            report.deficiency_log.values[t],
        ]);
    }
    table
}

pub fn cmd_theorem2(lf: &LossF64, epsilon: f64, horizon: usize, outputs: &mut Outputs) -> Result<Theorem2Report> {
    let report = theorem2(lf, epsilon, horizon)?;
    outputs.add_json("report.json", &report);
    outputs.add("theorem2.csv", theorem2_table(&report).to_csv());
    if !report.inequality_holds {
        return Err(RunError::Invariant(format!(
            "eta * D_lf <= D_log + c fails by {} after fitting c = {}",
            report.inequality_worst_excess, report.inequality_constant
        )));
    }
    Ok(report)
}
