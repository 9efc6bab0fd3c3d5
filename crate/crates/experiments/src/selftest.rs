//! Fast end-to-end checks of the installed binary.

use std::sync::Arc;

use lossgeom::{
    curvature, equivalence_factor, is_superprediction, log_curvature, mixability_constant, thm1_transform, Constant,
    DataSequence, ExpertPoolF64, LossF64, SuperpredictionPoint,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analyze::analyze;
use crate::deficiency::run_deficiency;
use crate::error::{Result, RunError};
use crate::output::Outputs;
use crate::theorem2::theorem2;

const TRANSFORM_SAMPLES: usize = 1000;
const THEOREM2_HORIZON: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelftestReport {
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| format!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail))
            .collect()
    }
}

fn check(name: &str, run: impl FnOnce() -> Result<(bool, String)>) -> Check {
    let (passed, detail) = run().unwrap_or_else(|e| (false, format!("error: {e}")));
    Check { name: name.to_string(), passed, detail }
}

fn builtins() -> [LossF64; 3] {
    [LossF64::log(), LossF64::brier(), LossF64::spherical()]
}

fn analysis_table() -> Result<(bool, String)> {
    let expected = [(1.0, 1.0, Some(1.0)), (2.0, 2.0, None), (2.0, 2f64.sqrt(), None)];
    let mut ok = true;
    let mut detail = Vec::new();
    for (lf, (deg, eta, h)) in builtins().iter().zip(expected) {
        let r = analyze(lf)?;
        let eta_ok = r.eta.number().is_some_and(|e| (e - eta).abs() < 1e-4);
        let h_ok = match h {
            Some(h) => r.fundamentality.number().is_some_and(|x| (x - h).abs() < 1e-6),
            None => r.fundamentality.is_unbounded(),
        };
        ok &= r.degree.number() == Some(deg) && eta_ok && h_ok && r.fundamental == h.is_some() && r.routes_agree;
        detail.push(format!("{} eta={} H={}", r.loss, r.eta, r.fundamentality));
    }
    Ok((ok, detail.join(", ")))
}

fn log_curvature_closed_form() -> Result<(bool, String)> {
    let log = LossF64::log();
    let mut worst: f64 = 0.0;
    for i in 1..100 {
        let p = i as f64 / 100.0;
        let closed = p * (1.0 - p) / (p * p + (1.0 - p) * (1.0 - p)).powf(1.5);
        worst = worst.max((curvature(&log, p)? - closed).abs()).max((log_curvature(p) - closed).abs());
    }
    Ok((worst < 1e-9, format!("max error {worst:e}")))
}

fn transform_samples() -> Result<(bool, String)> {
    let log = LossF64::log();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut misses = 0;
    for lf in builtins() {
        let eta = mixability_constant(&lf)?.kind.value().unwrap_or(0.0);
        for _ in 0..TRANSFORM_SAMPLES {
            let p = rng.gen_range(0.01..0.99);
            let q = rng.gen_range(0.01..0.99);
            let pt = SuperpredictionPoint::new(
                lf.lambda0(q) + rng.gen_range(0.0..0.5),
                lf.lambda1(q) + rng.gen_range(0.0..0.5),
            );
            if !is_superprediction(&log, thm1_transform(&lf, eta, p, pt)?) {
                misses += 1;
            }
        }
    }
    Ok((misses == 0, format!("{misses} of {} samples missed", 3 * TRANSFORM_SAMPLES)))
}

fn closed_form_deficiency() -> Result<(bool, String)> {
    let pool = ExpertPoolF64::uniform(vec![Arc::new(Constant(0.0)), Arc::new(Constant(1.0))])?;
    let f: lossgeom::Algorithm<f64> = Arc::new(Constant(0.5));
    let r = run_deficiency(&LossF64::log(), &f, &pool, Some(1.0), &DataSequence::zeros(1000))?;
    let expected = 999.0 * 2f64.ln();
    let ok = (r.final_deficiency - expected).abs() < 1e-9 && r.verdict_fields.verdict == "growing";
    Ok((ok, format!("D = {} (expected {expected}), {}", r.final_deficiency, r.verdict_fields.verdict)))
}

fn short_theorem2() -> Result<(bool, String)> {
    let r = theorem2(&LossF64::brier(), 0.1, THEOREM2_HORIZON)?;
    let ok = r.verdict_lf == "bounded" && r.verdict_log == "growing" && r.inequality_holds;
    Ok((ok, format!("brier {}, log {}, alpha {:?}", r.verdict_lf, r.verdict_log, r.growth_exponent)))
}

fn truncation_factor() -> Result<(bool, String)> {
    let f = equivalence_factor(&LossF64::log(), &LossF64::brier(), 0.1)?;
    Ok(((f - 50.0 / 9.0).abs() < 1e-3, format!("factor {f}")))
}

pub fn selftest() -> SelftestReport {
    let checks = vec![
        check("analysis table", analysis_table),
        check("log curvature closed form", log_curvature_closed_form),
        check("superprediction transform", transform_samples),
        check("closed-form deficiency", closed_form_deficiency),
        check("power predictor verdicts", short_theorem2),
        check("truncation factor", truncation_factor),
    ];
    let passed = checks.iter().filter(|c| c.passed).count();
    SelftestReport { passed, failed: checks.len() - passed, checks }
}

pub fn cmd_selftest(outputs: &mut Outputs) -> Result<SelftestReport> {
    let report = selftest();
    outputs.add_json("report.json", &report);
    let mut lines = report.lines().join("\n");
    lines.push_str(&format!("\n{} passed, {} failed\n", report.passed, report.failed));
    outputs.set_summary(lines);
    if report.failed > 0 {
        return Err(RunError::Invariant(format!("{} selftest checks failed", report.failed)));
    }
    Ok(report)
}
