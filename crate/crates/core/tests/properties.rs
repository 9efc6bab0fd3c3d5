use std::sync::Arc;

use lossgeom::{
    check_proper, cumulative_loss, expected_loss, induced_measure, is_superprediction, log_induced_measure,
    mixability_constant, slope_identity_residual, thm1_transform, verify_superloss, Algorithm, Builtin, Clamped,
    Constant, DataSequence, Laplace, LossF64, Outcome, PowerPredictor, PredictionAlgorithm, SuperpredictionPoint,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn builtins() -> [LossF64; 3] {
    [LossF64::log(), LossF64::brier(), LossF64::spherical()]
}

fn labels(bits: &[bool]) -> DataSequence {
    DataSequence::from_labels(bits.iter().map(|&b| if b { Outcome::One } else { Outcome::Zero }))
}

fn algorithm(choice: u8, p: f64) -> Algorithm<f64> {
    match choice % 4 {
        0 => Arc::new(Constant(p)),
        1 => Arc::new(Laplace),
        2 => Arc::new(PowerPredictor::new(2, 0.1).unwrap()),
        _ => Arc::new(Clamped::new(Arc::new(Laplace), 0.05)),
    }
}

#[test]
fn builtins_are_strictly_proper() {
    for lf in builtins() {
        let report = check_proper(&lf, 201).unwrap();
        assert!(report.proper && report.strict, "{}: {report:?}", lf.name());
    }
}

#[test]
fn slope_identity_on_the_grid() {
    for lf in builtins() {
        for i in 1..=99 {
            let r = slope_identity_residual(&lf, i as f64 / 100.0).unwrap();
            assert!(r.abs() <= 1e-6, "{} p={i}/100: {r}", lf.name());
        }
    }
}

#[test]
fn builtin_invariants_hold() {
    for kind in Builtin::ALL {
        let lf = LossF64::builtin(kind);
        lf.validate(1001).unwrap();
        assert_eq!(lf.lambda0(0.0), 0.0);
        assert_eq!(lf.lambda1(1.0), 0.0);
    }
}

#[test]
fn transformed_superpredictions_are_log_superpredictions() {
    let log = LossF64::log();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for lf in builtins() {
        let eta = mixability_constant(&lf).unwrap().kind.value().unwrap();
        for _ in 0..10_000 {
            let p = rng.gen_range(0.01..0.99);
            let q: f64 = rng.gen_range(0.0..=1.0);
            let pt = SuperpredictionPoint::new(
                lf.lambda0(q) + rng.gen_range(0.0..0.5),
                lf.lambda1(q) + rng.gen_range(0.0..0.5),
            );
            if !pt.a.is_finite() || !pt.b.is_finite() {
                continue;
            }
            let mapped = thm1_transform(&lf, eta, p, pt).unwrap();
            assert!(is_superprediction(&log, mapped), "{}: p={p}, q={q}, {pt:?} -> {mapped:?}", lf.name());
        }
    }
}

#[test]
fn transform_fails_above_the_mixability_constant() {
    let log = LossF64::log();
    let brier = LossF64::brier();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let misses = (0..2000)
        .filter(|_| {
            let p = rng.gen_range(0.01..0.99);
            let q = rng.gen_range(0.01..0.99);
            let pt = SuperpredictionPoint::new(brier.lambda0(q), brier.lambda1(q));
            !is_superprediction(&log, thm1_transform(&brier, 3.0, p, pt).unwrap())
        })
        .count();
    assert!(misses > 0);
}

proptest! {
    #[test]
    fn truthful_prediction_minimizes_expected_loss(p in 0.001f64..0.999, q in 0.0f64..=1.0) {
        for lf in builtins() {
            prop_assert!(expected_loss(&lf, p, p) <= expected_loss(&lf, p, q) + 1e-12);
        }
    }

    #[test]
    fn cumulative_loss_is_a_superloss_process(
        bits in prop::collection::vec(any::<bool>(), 1..80),
        choice in 0u8..4,
        p in 0.01f64..0.99,
    ) {
        let sigma = labels(&bits);
        let f = algorithm(choice, p);
        for lf in builtins() {
            let trace = cumulative_loss(f.as_ref(), &sigma, &lf);
            prop_assert_eq!(trace.cumulative.len(), bits.len() + 1);
            prop_assert_eq!(trace.cumulative[0], 0.0);
            prop_assert!(trace.cumulative.windows(2).all(|w| w[1] >= w[0]));
            prop_assert_eq!(verify_superloss(&trace.process_tree(&sigma, &lf), &lf).unwrap(), None);
        }
    }

    #[test]
    fn log_loss_is_minus_log_induced_measure(
        bits in prop::collection::vec(any::<bool>(), 1..200),
        choice in 0u8..4,
        p in 0.01f64..0.99,
    ) {
        let sigma = labels(&bits);
        let f = algorithm(choice, p);
        let total = cumulative_loss(f.as_ref(), &sigma, &LossF64::log()).final_loss();
        prop_assert!((total + log_induced_measure(f.as_ref(), &sigma)).abs() <= 1e-9 * total.max(1.0));
        if bits.len() < 40 {
            prop_assert!((total + induced_measure(f.as_ref(), &sigma).ln()).abs() <= 1e-9 * total.max(1.0));
        }
    }

    #[test]
    fn power_predictions_decrease_inside_the_unit_interval(k in 2u32..6, frac in 0.01f64..0.99) {
        let eps = frac * (1.0 - 1.0 / k as f64);
        let f = PowerPredictor::new(k, eps).unwrap();
        let ps = f.predict_sequence(DataSequence::zeros(5000).items());
        prop_assert!(ps.iter().all(|&p| p > 0.0 && p < 1.0));
        prop_assert!(ps.windows(2).all(|w| w[1] < w[0]));
    }
}
