use std::path::Path;

use lossgeom::Outcome;
use lossgeom_experiments::specs::{build_pool, parse_algorithm, parse_loss_spec, parse_pool_arg};
use lossgeom_experiments::{execute, ExperimentConfig, ExperimentKind, Outputs, PoolEntry, RunError};

#[test]
fn algorithm_specs() {
    let here = Path::new(".");
    assert_eq!(parse_algorithm("const:0.25", here).unwrap().predict(&[], 0), 0.25);
    assert_eq!(parse_algorithm("laplace", here).unwrap().predict(&[], 0), 0.5);
    let power = parse_algorithm("power:2:0.1", here).unwrap();
    assert!((power.predict(&[], 0) - 2f64.powf(-0.6)).abs() < 1e-15);
    for bad in ["const:1.5", "const:x", "power:2", "power:0:0.1", "oracle", "laplace:3"] {
        assert!(matches!(parse_algorithm(bad, here), Err(RunError::Config(_))), "{bad}");
    }
}

#[test]
fn table_spec_reads_a_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("p.txt"), "0.1\n0.9\n").unwrap();
    let f = parse_algorithm("table:p.txt", dir.path()).unwrap();
    let seq = lossgeom::DataSequence::from_labels([Outcome::Zero, Outcome::One]);
    assert_eq!(f.predict_sequence(seq.items()), vec![0.1, 0.9]);
    assert!(matches!(parse_algorithm("table:none.txt", dir.path()), Err(RunError::Io { .. })));
}

#[test]
fn loss_specs() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(parse_loss_spec("brier", dir.path()).unwrap().name(), "brier");
    let src = lossgeom::Builtin::Log.dsl();
    std::fs::write(dir.path().join("l.txt"), src).unwrap();
    let from_file = parse_loss_spec("@l.txt", dir.path()).unwrap();
    let inline = parse_loss_spec(src, dir.path()).unwrap();
    assert_eq!(from_file.lambda0(0.3), inline.lambda0(0.3));
    assert!(parse_loss_spec("not a loss", dir.path()).is_err());
}

#[test]
fn pool_syntax() {
    let entries = parse_pool_arg("const:0=0.25; const:1=0.75").unwrap();
    assert_eq!(entries[1], PoolEntry::Weighted { algorithm: "const:1".into(), weight: 0.75 });
    let pool = build_pool(&entries, Path::new(".")).unwrap();
    assert_eq!(pool.weights(), &[0.25, 0.75]);
    let uniform = build_pool(&parse_pool_arg("const:0;laplace;const:1").unwrap(), Path::new(".")).unwrap();
    assert_eq!(uniform.len(), 3);
    let mixed = parse_pool_arg("const:0=0.5;const:1").unwrap();
    assert!(build_pool(&mixed, Path::new(".")).is_err());
    assert!(build_pool(&parse_pool_arg("const:0=0.5;const:1=0.4").unwrap(), Path::new(".")).is_err());
    assert!(parse_pool_arg("const:0=heavy").is_err());
}

#[test]
fn config_rejects_unknown_keys_and_zero_horizon() {
    assert!(ExperimentConfig::from_json(r#"{"loss": "log", "colour": 1}"#, "").is_err());
    let cfg = ExperimentConfig::from_json(r#"{"experiment": "compare-truncated", "horizon": 0}"#, "").unwrap();
    assert_eq!(cfg.experiment, Some(ExperimentKind::CompareTruncated));
    assert!(matches!(cfg.validate(), Err(RunError::Config(_))));
}

#[test]
fn execute_queues_files_and_rejects_missing_inputs() {
    let cfg = ExperimentConfig { loss: Some("log".into()), ..Default::default() };
    let mut outputs = Outputs::default();
    execute(ExperimentKind::Analyze, &cfg, &mut outputs).unwrap();
    assert!(outputs.get("report.json").is_some());
    assert!(outputs.get("curvature.csv").is_some());

    let cfg = ExperimentConfig { loss: Some("brier".into()), eta: Some(3.0), ..Default::default() };
    let mut outputs = Outputs::default();
    let err = execute(ExperimentKind::Deficiency, &cfg, &mut outputs).unwrap_err();
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn errors_map_to_exit_codes() {
    assert_eq!(RunError::Usage("x".into()).exit_code(), 1);
    assert_eq!(RunError::Config("x".into()).exit_code(), 1);
    assert_eq!(RunError::Invariant("x".into()).exit_code(), 2);
    assert_eq!(RunError::from(lossgeom::Error::OutOfRange("x".into())).exit_code(), 2);
}
