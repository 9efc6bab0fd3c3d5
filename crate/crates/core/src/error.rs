use thiserror::Error;

use crate::loss::Outcome;

/// Errors produced by the analysis routines.
///
/// Probabilities and losses carried by variants are reported as `f64`
/// regardless of the scalar type the computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("loss function violates `{invariant}` at p = {witness}")]
    InvalidLoss { invariant: &'static str, witness: f64 },

    #[error("derivative of order {order} of branch {branch} is undefined at p = {p}")]
    DerivativeUndefined { branch: Outcome, order: u32, p: f64 },

    #[error("both first derivatives vanish at p = {p}")]
    VanishingDerivatives { p: f64 },

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("sampled curve is not strictly monotone at point {index}")]
    NonMonotoneCurve { index: usize },

    #[error("tangent slope is not negative near curve parameter {at}")]
    NonNegativeSlope { at: f64 },

    #[error("sampled curve is not strictly convex near curve parameter {at} (corner or inflection)")]
    NonConvexCurve { at: f64 },

    #[error("learning rate {eta} exceeds the mixability constant {mixability}")]
    EtaExceedsMixability { eta: f64, mixability: f64 },

    #[error("expert pool is invalid: {0}")]
    InvalidPool(String),

    #[error("process tree is not prefix-closed: node of length {len} has no parent")]
    NotPrefixClosed { len: usize },

    #[error("deficiency is undefined at step {step}: both cumulative losses are infinite")]
    IndeterminateDeficiency { step: usize },

    #[error("growth fit needs at least {needed} tail points, got {got}")]
    ShortTrace { needed: usize, got: usize },

    #[error("growth fit undefined: nonpositive deficiency at step {step}")]
    NonPositiveDeficiency { step: usize },

    #[error("deficiency does not vary over the tail; it is bounded")]
    BoundedDeficiency,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
