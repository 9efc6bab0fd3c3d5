//! Geometric analysis of a single loss function.

use lossgeom::geometry::{infimum, supremum, MAX_NUMERIC_ORDER, VANISHING_THRESHOLD};
use lossgeom::{
    check_proper, criterion_function, curvature_profile, degree, fundamentality_constant, mixability_constant,
    CurvatureProfile, LossF64,
};
use serde::Serialize;

use crate::error::{Result, RunError};
use crate::output::{Outputs, Quantity, Table};

/// Grid size for the propriety check.
pub const PROPRIETY_GRID: usize = 1001;
/// Interior points of the emitted curvature table.
pub const CURVATURE_TABLE_POINTS: usize = 99;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub loss: String,
    pub proper: bool,
    pub strictly_proper: bool,
    pub degree: Quantity,
    pub eta: Quantity,
    #[serde(rename = "H")]
    pub fundamentality: Quantity,
    pub mixable: bool,
    pub fundamental: bool,
    /// `inf_p (1 − p) λ₀′(p)`; positive exactly for fundamental losses.
    pub criterion_inf: Quantity,
    /// `sup_p (1 − p) λ₀′(p)`; finite for mixable losses.
    pub criterion_sup: Quantity,
    /// Whether the curvature and criterion-function routes agree on both
    /// verdicts.
    pub routes_agree: bool,
    #[serde(skip)]
    pub curvature: CurvatureProfile<f64>,
}

pub fn analyze(lf: &LossF64) -> Result<AnalysisReport> {
    let propriety = check_proper(lf, PROPRIETY_GRID)?;
    let deg = degree(lf, MAX_NUMERIC_ORDER)?;
    let eta = mixability_constant(lf)?.kind;
    let h = fundamentality_constant(lf)?.kind;
    let c_inf = infimum(lf, |p| criterion_function(lf, p))?.kind;
    let c_sup = supremum(lf, |p| criterion_function(lf, p))?.kind;

    let mixable = eta.value().is_some_and(|e| e > VANISHING_THRESHOLD);
    let fundamental = h.is_finite();
    let mixable_by_criterion = c_sup.is_finite();
    let fundamental_by_criterion = c_inf.value().is_some_and(|c| c > VANISHING_THRESHOLD);

    Ok(AnalysisReport {
        loss: lf.name().to_string(),
        proper: propriety.proper,
        strictly_proper: propriety.strict,
        degree: deg.degree.into(),
        eta: eta.into(),
        fundamentality: h.into(),
        mixable,
        fundamental,
        criterion_inf: c_inf.into(),
        criterion_sup: c_sup.into(),
        routes_agree: mixable == mixable_by_criterion && fundamental == fundamental_by_criterion,
        curvature: curvature_profile(lf, CURVATURE_TABLE_POINTS)?,
    })
}

pub fn curvature_table(profile: &CurvatureProfile<f64>) -> Table {
    let mut table = Table::new(vec!["p", "curvature", "log_curvature", "ratio", "criterion"]);
    for pt in &profile.points {
        table.push(vec![pt.p, pt.curvature, pt.log_curvature, pt.ratio, pt.criterion]);
    }
    table
}

/// Runs the analysis, queues `report.json` and `curvature.csv`, and fails
/// with a numeric error if the two verdict routes disagree.
pub fn cmd_analyze(lf: &LossF64, outputs: &mut Outputs) -> Result<AnalysisReport> {
    let report = analyze(lf)?;
    outputs.add_json("report.json", &report);
    outputs.add("curvature.csv", curvature_table(&report.curvature).to_csv());
    if !report.routes_agree {
        return Err(RunError::Invariant(format!(
            "curvature and criterion-function verdicts disagree for {}",
            report.loss
        )));
    }
    Ok(report)
}
