//! Geometry of binary proper losses and loss-relative predictive complexity.
//!
//! A binary loss is a pair `λ = (λ₀, λ₁)` of functions on `[0, 1]`, where
//! `λ_y(p)` is the loss for predicting `p = P(y = 1)` when the outcome is
//! `y`. The crate covers:
//!
//! * [`loss`]: built-in and parsed losses, expected loss, propriety checks.
//! * [`geometry`]: curvature of the loss curve, mixability and
//!   fundamentality constants, degree, truncation.
//! * [`prediction`]: data sequences, prediction algorithms, cumulative
//!   losses, superpredictions and superloss processes.
//! * [`complexity`]: the Aggregating Algorithm mixture over a finite pool
//!   and the randomness deficiency it induces.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! `*F64` aliases below cover the usual case.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod complexity;
pub mod diff;
pub mod dsl;
pub mod error;
pub mod geometry;
pub mod loss;
pub mod prediction;
pub mod reparam;
pub mod scalar;
pub mod search;

pub use complexity::{
    aa_mixture, aa_mixture_unchecked, deficiency, fit_dominance, fit_growth, randomness_verdict, DeficiencyTrace,
    DominanceReport, ExpertPool, GrowthFit, MixtureTrace, Verdict,
};
pub use dsl::{Expr, Func, LossSpec};
pub use error::{Error, Result};
pub use geometry::{
    criterion_function, criterion_function_dual, curvature, curvature_profile, curvature_ratio, degree,
    equivalence_factor, fundamentality_constant, is_eta_mixable, log_curvature, mixability_constant, slope_ratio,
    truncate, Bound, BoundEstimate, CurvatureProfile, Degree, DegreeResult,
};
pub use loss::{
    check_proper, expected_loss, loss, parse_loss, slope_identity_residual, Builtin, LossFunction, Outcome,
    PropernessReport,
};
pub use prediction::{
    cumulative_loss, induced_measure, is_superprediction, log_induced_measure, thm1_transform, verify_superloss,
    Algorithm, Clamped, Constant, DataSequence, Laplace, LossTrace, Observation, PowerPredictor, PredictionAlgorithm,
    ProcessTree, SuperpredictionPoint, TablePredictor,
};
pub use reparam::reparameterize;
pub use scalar::{log_sum_exp, Scalar};

pub type LossF64 = LossFunction<f64>;
pub type LossF32 = LossFunction<f32>;
pub type ExpertPoolF64 = ExpertPool<f64>;
pub type ExpertPoolF32 = ExpertPool<f32>;
pub type LossTraceF64 = LossTrace<f64>;
pub type MixtureTraceF64 = MixtureTrace<f64>;
pub type DeficiencyTraceF64 = DeficiencyTrace<f64>;
pub type ProcessTreeF64 = ProcessTree<f64>;
