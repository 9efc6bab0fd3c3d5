//! Acceptance criteria, one PASS/FAIL line each. Oracles are closed forms
//! and direct summations written out here, independent of the pipeline.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use lossgeom::{
    aa_mixture, criterion_function, cumulative_loss, curvature, equivalence_factor, induced_measure, is_eta_mixable,
    mixability_constant, thm1_transform, verify_superloss, Algorithm, Builtin, Clamped, Constant, DataSequence,
    ExpertPoolF64, Laplace, LossF64, Outcome, PowerPredictor, PredictionAlgorithm, SuperpredictionPoint,
    TablePredictor,
};
use lossgeom_experiments::compare::Triple;
use lossgeom_experiments::{analyze, compare_truncated, theorem2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, fn() -> Report);

struct Report {
    passed: bool,
    detail: String,
}

fn report(passed: bool, detail: impl Into<String>) -> Report {
    Report { passed, detail: detail.into() }
}

fn builtins() -> [LossF64; 3] {
    [LossF64::log(), LossF64::brier(), LossF64::spherical()]
}

fn grid(n: usize) -> impl Iterator<Item = f64> {
    (1..=n).map(move |i| i as f64 / (n + 1) as f64)
}

fn norm(p: f64) -> f64 {
    p * p + (1.0 - p) * (1.0 - p)
}

fn closed_curvature(kind: Builtin, p: f64) -> f64 {
    match kind {
        Builtin::Log => p * (1.0 - p) / norm(p).powf(1.5),
        Builtin::Brier => 0.5 * norm(p).powf(-1.5),
        Builtin::Spherical => 1.0,
    }
}

fn closed_criterion(kind: Builtin, p: f64) -> f64 {
    match kind {
        Builtin::Log => 1.0,
        Builtin::Brier => 2.0 * p * (1.0 - p),
        Builtin::Spherical => p * (1.0 - p) * norm(p).powf(-1.5),
    }
}

/// `inf_p k_λ(p) / k_ln(p)` over a uniform interior grid.
fn brute_force_eta(kind: Builtin, n: usize) -> f64 {
    grid(n).map(|p| closed_curvature(kind, p) / closed_curvature(Builtin::Log, p)).fold(f64::INFINITY, f64::min)
}

fn ac1_analysis_table() -> Report {
    let expected = [
        (Builtin::Log, 1u32, 1.0, 1e-6, Some(1.0)),
        (Builtin::Brier, 2, 2.0, 1e-4, None),
        (Builtin::Spherical, 2, 2f64.sqrt(), 1e-4, None),
    ];
    let start = Instant::now();
    let mut ok = true;
    let mut detail = Vec::new();
    for (kind, deg, eta, tol, h) in expected {
        let r = analyze(&LossF64::builtin(kind)).expect("analysis runs");
        let brute = brute_force_eta(kind, 1_000_000);
        let got_eta = r.eta.number().unwrap_or(f64::NAN);
        let h_ok = match h {
            Some(h) => r.fundamentality.number().is_some_and(|x| (x - h).abs() <= 1e-6),
            None => r.fundamentality.is_unbounded(),
        };
        ok &= r.degree.number() == Some(deg as f64)
            && (got_eta - eta).abs() <= tol
            && (brute - eta).abs() <= tol
            && h_ok
            && r.fundamental == h.is_some()
            && r.routes_agree;
        detail.push(format!("{} deg {} eta {got_eta:.9} (grid {brute:.9}) H {}", r.loss, r.degree, r.fundamentality));
    }
    timed(ok, detail.join("; "), start, Duration::from_secs(10))
}

fn ac2_curvature_closed_forms() -> Report {
    let start = Instant::now();
    let mut worst_builtin: f64 = 0.0;
    let mut worst_dsl: f64 = 0.0;
    for kind in [Builtin::Log, Builtin::Brier, Builtin::Spherical] {
        let builtin = LossF64::builtin(kind);
        let dsl = LossF64::parse(kind.dsl()).expect("builtin DSL parses");
        for p in grid(99) {
            let want = closed_curvature(kind, p);
            worst_builtin = worst_builtin.max((curvature(&builtin, p).unwrap() - want).abs());
            worst_dsl = worst_dsl.max((curvature(&dsl, p).unwrap() - want).abs());
        }
    }
    let ok = worst_builtin <= 1e-9 && worst_dsl <= 1e-4;
    timed(
        ok,
        format!("builtin max err {worst_builtin:.2e}, DSL max err {worst_dsl:.2e}"),
        start,
        Duration::from_secs(1),
    )
}

fn ac3_criterion_functions() -> Report {
    let mut worst: f64 = 0.0;
    for kind in [Builtin::Log, Builtin::Brier, Builtin::Spherical] {
        let lf = LossF64::builtin(kind);
        for p in grid(99) {
            worst = worst.max((criterion_function(&lf, p).unwrap() - closed_criterion(kind, p)).abs());
        }
    }
    report(worst <= 1e-9, format!("max err {worst:.2e}"))
}

/// `Σ_{n=2}^{N} n^{-s}` summed from the small end up.
fn partial_zeta_tail(s: f64, last: usize) -> f64 {
    (2..=last).rev().map(|n| (n as f64).powf(-s)).sum()
}

/// `ζ(s) − 1` via the partial sum to `N` plus the Euler-Maclaurin remainder.
fn zeta_minus_one(s: f64) -> f64 {
    let n = 1_000_000usize;
    let nf = n as f64;
    partial_zeta_tail(s, n) + nf.powf(1.0 - s) / (s - 1.0) - 0.5 * nf.powf(-s) + s * nf.powf(-s - 1.0) / 12.0
}

/// Limit of a converging trace by Aitken extrapolation on `T/4, T/2, T`.
fn extrapolated_limit(values: &[f64]) -> f64 {
    let t = values.len() - 1;
    let (a, b, c) = (values[t / 4], values[t / 2], values[t]);
    let r = (c - b) / (b - a);
    c + (c - b) * r / (1.0 - r)
}

fn ac4_theorem2() -> Report {
    const T: usize = 1_000_000;
    let start = Instant::now();
    let mut ok = true;
    let mut detail = Vec::new();
    for (eps, alpha, amplitude) in [(0.1, 0.4, 2.5), (0.3, 0.2, 5.0)] {
        let r = theorem2(&LossF64::brier(), eps, T).expect("experiment runs");
        let exponent = 1.0 + 2.0 * eps;
        let brier_sum = partial_zeta_tail(exponent, T + 1);
        let brier_limit = zeta_minus_one(exponent);
        let log_sum: f64 = (2..=T + 1).rev().map(|n| -(-(n as f64).powf(-0.5 - eps)).ln_1p()).sum();
        let trace_limit = extrapolated_limit(&r.deficiency_lf.values);
        let fit_alpha = r.growth_exponent.unwrap_or(f64::NAN);
        let ratio = r.growth_amplitude.unwrap_or(f64::NAN) / amplitude;
        let case_ok = r.verdict_lf == "bounded"
            && r.verdict_log == "growing"
            && (r.final_deficiency_lf - brier_sum).abs() <= 1e-9 * brier_sum
            && (trace_limit - brier_limit).abs() <= 0.2
            && (r.final_deficiency_log - log_sum).abs() <= 1e-9 * log_sum
            && (fit_alpha - alpha).abs() <= 0.05
            && (0.7..=1.3).contains(&ratio)
            && r.inequality_holds;
        ok &= case_ok;
        detail.push(format!(
            "eps {eps}: D_brier {:.6} (sum {brier_sum:.6}, limit {brier_limit:.4}, extrapolated {trace_limit:.4}) {}; \
             D_log {} alpha {fit_alpha:.4} amplitude x{ratio:.3}",
            r.final_deficiency_lf, r.verdict_lf, r.verdict_log
        ));
    }
    timed(ok, detail.join("; "), start, Duration::from_secs(60))
}

fn ac5_superprediction_transform() -> Report {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut misses = 0usize;
    let mut total = 0usize;
    for lf in builtins() {
        let eta = mixability_constant(&lf).unwrap().kind.value().unwrap();
        for _ in 0..10_000 {
            let p = rng.gen_range(1e-6..1.0 - 1e-6);
            let q: f64 = rng.gen_range(0.0..=1.0);
            let slack = if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(0.0..1.0) };
            let pt = SuperpredictionPoint::new(lf.lambda0(q) + slack, lf.lambda1(q) + rng.gen_range(0.0..0.01));
            let m = thm1_transform(&lf, eta, p, pt).unwrap();
            // (a, b) is a log superprediction iff e^{-a} + e^{-b} ≤ 1.
            let mass = (-m.a).exp() + (-m.b).exp();
            total += 1;
            if mass > 1.0 + 1e-9 {
                misses += 1;
            }
        }
    }
    timed(misses == 0, format!("{misses} of {total} samples missed"), start, Duration::from_secs(5))
}

fn random_algorithm(rng: &mut ChaCha8Rng) -> Algorithm<f64> {
    match rng.gen_range(0..5) {
        0 => Arc::new(Constant(rng.gen_range(0.0..=1.0))),
        1 => Arc::new(Constant(if rng.gen_bool(0.5) { 0.0 } else { 1.0 })),
        2 => Arc::new(Laplace),
        3 => Arc::new(PowerPredictor::new(rng.gen_range(1..4), rng.gen_range(0.01..0.3)).unwrap()),
        _ => {
            let table = (0..rng.gen_range(1..300)).map(|_| rng.gen_range(0.0..=1.0)).collect();
            Arc::new(Clamped::new(Arc::new(TablePredictor::new(table).unwrap()), 1e-3))
        }
    }
}

fn random_sequence(rng: &mut ChaCha8Rng, len: usize) -> DataSequence {
    let bias = rng.gen_range(0.0..=1.0);
    DataSequence::from_labels((0..len).map(|_| if rng.gen_bool(bias) { Outcome::One } else { Outcome::Zero }))
}

/// Cumulative losses summed directly from the predictions.
fn direct_losses(f: &dyn PredictionAlgorithm<f64>, sigma: &DataSequence, lf: &LossF64) -> Vec<f64> {
    let mut total = 0.0;
    let mut out = vec![0.0];
    for (p, obs) in f.predict_sequence(sigma.items()).into_iter().zip(sigma.items()) {
        total += lf.eval(obs.label, p);
        out.push(total);
    }
    out
}

fn ac6_mixture_validity() -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut failures = Vec::new();
    for lf in builtins() {
        let eta = mixability_constant(&lf).unwrap().kind.value().unwrap();
        for trial in 0..100 {
            let n = rng.gen_range(1..=6);
            let experts: Vec<Algorithm<f64>> = (0..n).map(|_| random_algorithm(&mut rng)).collect();
            let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
            let sum: f64 = raw.iter().sum();
            let weights: Vec<f64> = raw.iter().map(|w| w / sum).collect();
            let pool = ExpertPoolF64::new(experts, weights.clone()).unwrap();
            let sigma = random_sequence(&mut rng, 200);
            let trace = aa_mixture(&pool, &lf, eta, &sigma).unwrap();
            let superloss = verify_superloss(&trace.process_tree(&sigma), &lf).unwrap().is_none();
            let dominated = pool.experts().iter().zip(&weights).all(|(e, w)| {
                let member = direct_losses(e.as_ref(), &sigma, &lf);
                trace.values.iter().zip(&member).all(|(&m, &l)| m <= l - w.ln() / eta + 1e-9 * (1.0 + m.abs()))
            });
            if !(superloss && dominated) {
                failures.push(format!("{} trial {trial}", lf.name()));
            }
        }
    }
    let mut flips = Vec::new();
    for lf in [LossF64::brier(), LossF64::spherical()] {
        let eta = mixability_constant(&lf).unwrap().kind.value().unwrap();
        flips.push(is_eta_mixable(&lf, eta - 1e-3) && !is_eta_mixable(&lf, eta + 1e-3));
    }
    let ok = failures.is_empty() && flips.iter().all(|&f| f);
    report(ok, format!("300 mixtures, {} failures {:?}; eta flips {flips:?}", failures.len(), failures))
}

fn ac7_log_loss_identity() -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let log = LossF64::log();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let f = Arc::new(Clamped::new(random_algorithm(&mut rng), 1e-3)) as Algorithm<f64>;
        let len = rng.gen_range(1..=60);
        let sigma = random_sequence(&mut rng, len);
        let loss = cumulative_loss(f.as_ref(), &sigma, &log).final_loss();
        let measure = induced_measure(f.as_ref(), &sigma);
        worst = worst.max((loss + measure.ln()).abs());
    }
    report(worst <= 1e-9, format!("100 pairs, max |Loss + ln P| = {worst:.2e}"))
}

fn ac8_truncation() -> Report {
    let oracle =
        (0..=8000).map(|i| 0.1 + 0.8 * i as f64 / 8000.0).map(|p| 1.0 / (2.0 * p * (1.0 - p))).fold(0.0, f64::max);
    let factor = equivalence_factor(&LossF64::log(), &LossF64::brier(), 0.1).unwrap();
    let r = compare_truncated(&LossF64::log(), &LossF64::brier(), 0.1, &Triple::default_with(10_000, 0))
        .expect("comparison runs");
    let ok = (factor - 5.5556).abs() <= 1e-3
        && (factor - oracle).abs() <= 1e-3
        && r.factor == factor
        && r.forward_holds
        && r.backward_holds;
    report(
        ok,
        format!(
            "factor {factor:.6} (grid {oracle:.6}); T=10^4 constants {:.4} / {:.4}, worst excess {:.2e} / {:.2e}",
            r.forward_constant, r.backward_constant, r.forward_worst_excess, r.backward_worst_excess
        ),
    )
}

fn timed(ok: bool, detail: String, start: Instant, budget: Duration) -> Report {
    let elapsed = start.elapsed();
    let within = elapsed <= budget;
    report(ok && within, format!("{detail} [{:.2}s, budget {}s]", elapsed.as_secs_f64(), budget.as_secs()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("AC1 analysis table", ac1_analysis_table),
        ("AC2 curvature closed forms", ac2_curvature_closed_forms),
        ("AC3 criterion functions", ac3_criterion_functions),
        ("AC4 power predictor experiment", ac4_theorem2),
        ("AC5 superprediction transform", ac5_superprediction_transform),
        ("AC6 mixture validity", ac6_mixture_validity),
        ("AC7 log loss identity", ac7_log_loss_identity),
        ("AC8 truncation", ac8_truncation),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let r = run();
        if !r.passed {
            failed += 1;
        }
        println!("{} {name}: {}", if r.passed { "PASS" } else { "FAIL" }, r.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
