use lossgeom::{
    criterion_function, curvature, curvature_ratio, degree, fundamentality_constant, is_eta_mixable, log_curvature,
    mixability_constant, Bound, Builtin, Degree, LossF64,
};

fn grid99() -> impl Iterator<Item = f64> {
    (1..=99).map(|i| i as f64 / 100.0)
}

fn q(p: f64) -> f64 {
    p * p + (1.0 - p) * (1.0 - p)
}

fn curvature_oracle(kind: Builtin, p: f64) -> f64 {
    match kind {
        Builtin::Log => p * (1.0 - p) / q(p).powf(1.5),
        Builtin::Brier => 0.5 * q(p).powf(-1.5),
        Builtin::Spherical => 1.0,
    }
}

fn criterion_oracle(kind: Builtin, p: f64) -> f64 {
    match kind {
        Builtin::Log => 1.0,
        Builtin::Brier => 2.0 * p * (1.0 - p),
        Builtin::Spherical => p * (1.0 - p) * q(p).powf(-1.5),
    }
}

#[test]
fn curvature_matches_closed_forms() {
    for kind in Builtin::ALL {
        let lf = LossF64::builtin(kind);
        for p in grid99() {
            let k = curvature(&lf, p).unwrap();
            assert!((k - curvature_oracle(kind, p)).abs() < 1e-9, "{kind:?} p={p}: {k}");
        }
    }
}

#[test]
fn curvature_through_the_dsl() {
    for kind in Builtin::ALL {
        let lf = LossF64::parse(kind.dsl()).unwrap();
        assert!(lf.as_builtin().is_none());
        for p in grid99() {
            let k = curvature(&lf, p).unwrap();
            assert!((k - curvature_oracle(kind, p)).abs() < 1e-4, "{kind:?} p={p}: {k}");
        }
    }
}

#[test]
fn criterion_functions() {
    for kind in Builtin::ALL {
        let lf = LossF64::builtin(kind);
        for p in grid99() {
            let c = criterion_function(&lf, p).unwrap();
            assert!((c - criterion_oracle(kind, p)).abs() < 1e-9, "{kind:?} p={p}: {c}");
        }
    }
}

#[test]
fn brier_ratio_simplifies() {
    let lf = LossF64::brier();
    for p in grid99() {
        let r = curvature_ratio(&lf, p).unwrap();
        assert!((r - 1.0 / (2.0 * p * (1.0 - p))).abs() < 1e-9);
        assert!((curvature(&lf, p).unwrap() / log_curvature(p) - r).abs() < 1e-12);
    }
}

#[test]
fn mixability_against_brute_force() {
    for kind in Builtin::ALL {
        let lf = LossF64::builtin(kind);
        let n = 1_000_000;
        let brute = (1..n)
            .map(|i| curvature_oracle(kind, i as f64 / n as f64) / log_curvature(i as f64 / n as f64))
            .fold(f64::INFINITY, f64::min);
        let eta = mixability_constant(&lf).unwrap().kind.value().unwrap();
        assert!((eta - brute).abs() < 1e-8, "{kind:?}: {eta} vs {brute}");
    }
}

#[test]
fn fundamentality_routes_agree() {
    for kind in Builtin::ALL {
        let lf = LossF64::builtin(kind);
        let h = fundamentality_constant(&lf).unwrap().kind;
        let inf_criterion = grid99()
            .chain([1e-6, 1e-9, 1.0 - 1e-6])
            .map(|p| criterion_function(&lf, p).unwrap())
            .fold(f64::INFINITY, f64::min);
        let positive = inf_criterion > 1e-3;
        assert_eq!(h.is_finite(), positive, "{kind:?}: H={h:?}, inf criterion={inf_criterion}");
    }
    let h_log = fundamentality_constant(&LossF64::log()).unwrap().kind;
    assert!(matches!(h_log, Bound::Finite(h) if (h - 1.0).abs() < 1e-9), "{h_log:?}");
}

#[test]
fn eta_mixability_flips_at_the_constant() {
    for lf in [LossF64::log(), LossF64::brier(), LossF64::spherical()] {
        let eta = mixability_constant(&lf).unwrap().kind.value().unwrap();
        assert!(is_eta_mixable(&lf, eta - 1e-3), "{}", lf.name());
        assert!(!is_eta_mixable(&lf, eta + 1e-3), "{}", lf.name());
    }
}

#[test]
fn builtin_degrees() {
    let expect = [(Builtin::Log, 1), (Builtin::Brier, 2), (Builtin::Spherical, 2)];
    for (kind, k) in expect {
        let d = degree(&LossF64::builtin(kind), 4).unwrap().degree;
        assert_eq!(d, Degree::Finite(k));
    }
}

#[test]
fn single_precision_geometry() {
    let lf = lossgeom::LossF32::brier();
    let eta = mixability_constant(&lf).unwrap().kind.value().unwrap();
    assert!((eta - 2.0).abs() < 1e-3, "{eta}");
    assert!((curvature(&lf, 0.5f32).unwrap() - std::f32::consts::SQRT_2).abs() < 1e-4);
}
