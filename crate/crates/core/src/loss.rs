//! Binary loss functions `λ = (λ₀, λ₁)` and their basic properties.
//!
//! `λ_y(p)` is the loss suffered when `p` is announced as the probability of
//! the label `1` and the label turns out to be `y`. Losses are extended
//! reals: `+∞` is a value, allowed only at `p ∈ {0, 1}`.

use std::fmt;
use std::sync::Arc;

use crate::dsl::{self, LossSpec};
use crate::error::{Error, Result};
use crate::reparam::CurveLoss;
use crate::scalar::{factorial, from_usize, lit, mul_zero_inf, Scalar};

/// A binary label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Zero,
    One,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Zero, Outcome::One];

    pub fn from_bit(bit: u8) -> Option<Self> {
        match bit {
            0 => Some(Outcome::Zero),
            1 => Some(Outcome::One),
            _ => None,
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            Outcome::Zero => 0,
            Outcome::One => 1,
        }
    }

    /// Probability that a prediction `p` of the label `1` assigns to `self`.
    pub fn probability_under<T: Scalar>(self, p: T) -> T {
        match self {
            Outcome::Zero => T::one() - p,
            Outcome::One => p,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bit())
    }
}

/// Closed-form loss functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Builtin {
    Log,
    Brier,
    Spherical,
}

impl Builtin {
    pub const ALL: [Builtin; 3] = [Builtin::Log, Builtin::Brier, Builtin::Spherical];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Log => "log",
            Builtin::Brier => "brier",
            Builtin::Spherical => "spherical",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "log" | "ln" => Some(Builtin::Log),
            "brier" | "square" => Some(Builtin::Brier),
            "spherical" | "spher" => Some(Builtin::Spherical),
            _ => None,
        }
    }

    /// DSL text with the same formulas, used to cross-check numeric derivatives.
    pub fn dsl(self) -> &'static str {
        match self {
            Builtin::Log => "lambda0 = -ln(1-p); lambda1 = -ln(p)",
            Builtin::Brier => "lambda0 = p^2; lambda1 = (1-p)^2",
            Builtin::Spherical => "lambda0 = 1 - (1-p)/sqrt(p^2+(1-p)^2); lambda1 = 1 - p/sqrt(p^2+(1-p)^2)",
        }
    }
}

type Branch<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

#[derive(Clone)]
enum Source<T: Scalar> {
    Builtin(Builtin),
    Parsed(Arc<LossSpec>),
    Custom { lambda0: Branch<T>, lambda1: Branch<T> },
    Truncated { inner: Box<LossFunction<T>>, eps: T },
    Curve(Arc<CurveLoss<T>>),
}

/// Where a loss function's formulas come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceKind {
    Builtin(Builtin),
    Parsed,
    Custom,
    Truncated,
    Curve,
}

/// A binary loss function, immutable after construction.
#[derive(Clone)]
pub struct LossFunction<T: Scalar> {
    name: String,
    source: Source<T>,
}

impl<T: Scalar> fmt::Debug for LossFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LossFunction").field("name", &self.name).field("source", &self.source_kind()).finish()
    }
}

/// Grid size used when validating constructed losses.
pub const VALIDATION_GRID: usize = 1001;

const ENDPOINT_TOL: f64 = 1e-12;

impl<T: Scalar> LossFunction<T> {
    pub fn builtin(kind: Builtin) -> Self {
        LossFunction { name: kind.name().to_string(), source: Source::Builtin(kind) }
    }

    pub fn log() -> Self {
        Self::builtin(Builtin::Log)
    }

    pub fn brier() -> Self {
        Self::builtin(Builtin::Brier)
    }

    pub fn spherical() -> Self {
        Self::builtin(Builtin::Spherical)
    }

    /// Parses and validates a loss written in the loss DSL.
    pub fn parse(text: &str) -> Result<Self> {
        let spec = dsl::parse(text)?;
        Self::from_spec(spec)
    }

    pub fn from_spec(spec: LossSpec) -> Result<Self> {
        let lf = LossFunction { name: spec.to_string(), source: Source::Parsed(Arc::new(spec)) };
        lf.validate(VALIDATION_GRID)?;
        Ok(lf)
    }

    /// Wraps two closures as a loss function; validated like parsed losses.
    pub fn from_fns<F0, F1>(name: impl Into<String>, lambda0: F0, lambda1: F1) -> Result<Self>
    where
        F0: Fn(T) -> T + Send + Sync + 'static,
        F1: Fn(T) -> T + Send + Sync + 'static,
    {
        let lf = LossFunction {
            name: name.into(),
            source: Source::Custom { lambda0: Arc::new(lambda0), lambda1: Arc::new(lambda1) },
        };
        lf.validate(VALIDATION_GRID)?;
        Ok(lf)
    }

    pub(crate) fn from_curve(name: String, curve: CurveLoss<T>) -> Self {
        LossFunction { name, source: Source::Curve(Arc::new(curve)) }
    }

    /// The loss with predictions clamped to `[eps, 1 - eps]` before evaluation.
    pub fn truncate(&self, eps: T) -> Result<Self> {
        if !(eps > T::zero() && eps < lit(0.5)) {
            return Err(Error::OutOfRange(format!("truncation eps = {eps} must lie in (0, 0.5)")));
        }
        Ok(LossFunction {
            name: format!("{}@[{eps},{}]", self.name, T::one() - eps),
            source: Source::Truncated { inner: Box::new(self.clone()), eps },
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source_kind(&self) -> SourceKind {
        match &self.source {
            Source::Builtin(b) => SourceKind::Builtin(*b),
            Source::Parsed(_) => SourceKind::Parsed,
            Source::Custom { .. } => SourceKind::Custom,
            Source::Truncated { .. } => SourceKind::Truncated,
            Source::Curve(_) => SourceKind::Curve,
        }
    }

    pub fn as_builtin(&self) -> Option<Builtin> {
        match self.source {
            Source::Builtin(b) => Some(b),
            _ => None,
        }
    }

    /// The parsed DSL definition, if the loss came from one.
    pub fn spec(&self) -> Option<&LossSpec> {
        match &self.source {
            Source::Parsed(spec) => Some(spec),
            _ => None,
        }
    }

    /// Whether derivatives are available in closed form (as opposed to
    /// finite differences).
    pub fn has_closed_form_derivatives(&self, order: u32) -> bool {
        match &self.source {
            Source::Builtin(Builtin::Spherical) => order <= 4,
            Source::Builtin(_) => true,
            Source::Truncated { inner, .. } => inner.has_closed_form_derivatives(order),
            _ => false,
        }
    }

    /// Range of predictions along which the prediction curve is traced.
    ///
    /// `[0, 1]` for ordinary losses; truncated and curve-derived losses are
    /// constant outside a narrower closed interval.
    pub fn domain(&self) -> (T, T) {
        match &self.source {
            Source::Truncated { inner, eps } => {
                let (lo, hi) = inner.domain();
                (lo.max(*eps), hi.min(T::one() - *eps))
            }
            Source::Curve(c) => c.domain(),
            _ => (T::zero(), T::one()),
        }
    }

    /// Whether the curve's domain is the full `[0, 1]` (with possibly
    /// singular endpoints) rather than a closed sub-interval.
    pub fn spans_unit_interval(&self) -> bool {
        let (lo, hi) = self.domain();
        lo == T::zero() && hi == T::one()
    }

    /// `λ_y(p)`.
    pub fn eval(&self, y: Outcome, p: T) -> T {
        match &self.source {
            Source::Builtin(b) => builtin_value(*b, y, p),
            Source::Parsed(spec) => match y {
                Outcome::Zero => spec.lambda0.eval(p),
                Outcome::One => spec.lambda1.eval(p),
            },
            Source::Custom { lambda0, lambda1 } => match y {
                Outcome::Zero => lambda0(p),
                Outcome::One => lambda1(p),
            },
            Source::Truncated { inner, eps } => inner.eval(y, p.max(*eps).min(T::one() - *eps)),
            Source::Curve(c) => c.eval(y, p),
        }
    }

    pub fn lambda0(&self, p: T) -> T {
        self.eval(Outcome::Zero, p)
    }

    pub fn lambda1(&self, p: T) -> T {
        self.eval(Outcome::One, p)
    }

    /// `λ_y^{(order)}(p)`, one-sided at the endpoints of `[0, 1]`.
    pub fn derivative(&self, y: Outcome, order: u32, p: T) -> Result<T> {
        let undefined = || Error::DerivativeUndefined { branch: y, order, p: p.to_f64().unwrap_or(f64::NAN) };
        if order == 0 {
            let v = self.eval(y, p);
            return if v.is_nan() { Err(undefined()) } else { Ok(v) };
        }
        if !(p >= T::zero() && p <= T::one()) {
            return Err(undefined());
        }
        let value = match &self.source {
            Source::Builtin(b) => builtin_derivative(*b, y, order, p),
            Source::Truncated { inner, eps } => {
                if p < *eps || p > T::one() - *eps {
                    Some(T::zero())
                } else {
                    return inner.derivative(y, order, p);
                }
            }
            Source::Curve(c) => c.derivative(y, order, p),
            Source::Parsed(_) | Source::Custom { .. } => None,
        };
        let value = match value {
            Some(v) => Some(v),
            None => crate::diff::derivative(|x| self.eval(y, x), p, order, T::zero(), T::one()),
        };
        value.filter(|v| v.is_finite()).ok_or_else(undefined)
    }

    /// Checks the standing assumptions on a uniform grid of `grid` points.
    pub fn validate(&self, grid: usize) -> Result<()> {
        let grid = grid.max(3);
        let tol: T = lit(ENDPOINT_TOL);
        let last = from_usize::<T>(grid - 1);
        let witness = |p: T| p.to_f64().unwrap_or(f64::NAN);
        let mut prev = [T::zero(); 2];
        for i in 0..grid {
            let p = from_usize::<T>(i) / last;
            let interior = i > 0 && i + 1 < grid;
            for (b, y) in Outcome::BOTH.into_iter().enumerate() {
                let v = self.eval(y, p);
                let fail = |invariant| Err(Error::InvalidLoss { invariant, witness: witness(p) });
                if v.is_nan() {
                    return fail("loss defined (not NaN)");
                }
                if v < -tol {
                    return fail("loss nonnegative");
                }
                if interior && !v.is_finite() {
                    return fail("loss finite on (0,1)");
                }
                if i > 0 {
                    let (a, c) = (prev[b], v);
                    let ok = match y {
                        Outcome::Zero => c >= a - tol * (T::one() + a.abs()),
                        Outcome::One => c <= a + tol * (T::one() + a.abs()),
                    };
                    if !ok {
                        return fail(match y {
                            Outcome::Zero => "lambda0 nondecreasing",
                            Outcome::One => "lambda1 nonincreasing",
                        });
                    }
                }
                prev[b] = v;
            }
        }
        if self.lambda0(T::zero()).abs() > tol {
            return Err(Error::InvalidLoss { invariant: "lambda0(0) = 0", witness: 0.0 });
        }
        if self.lambda1(T::one()).abs() > tol {
            return Err(Error::InvalidLoss { invariant: "lambda1(1) = 0", witness: 1.0 });
        }
        Ok(())
    }
}

fn builtin_value<T: Scalar>(kind: Builtin, y: Outcome, p: T) -> T {
    let one = T::one();
    let q = match y {
        Outcome::Zero => one - p,
        Outcome::One => p,
    };
    match kind {
        Builtin::Log => -q.ln(),
        Builtin::Brier => (one - q) * (one - q),
        Builtin::Spherical => {
            let norm = (p * p + (one - p) * (one - p)).sqrt();
            one - q / norm
        }
    }
}

/// Numerators of `d^k/dp^k [p / sqrt(u)]` times `u^{k+1/2}`, `u = 2p² − 2p + 1`.
fn spherical_numerator<T: Scalar>(order: u32, p: T) -> T {
    let coeffs: &[f64] = match order {
        1 => &[1.0, -1.0],
        2 => &[2.0, -7.0, 4.0],
        3 => &[3.0, -33.0, 60.0, -24.0],
        4 => &[-12.0, -87.0, 504.0, -624.0, 192.0],
        _ => unreachable!("closed form available up to order 4"),
    };
    coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * p + lit::<T>(c))
}

/// Closed-form derivatives of the builtins; `None` where unavailable.
fn builtin_derivative<T: Scalar>(kind: Builtin, y: Outcome, order: u32, p: T) -> Option<T> {
    let one = T::one();
    let two: T = lit(2.0);
    match kind {
        Builtin::Log => {
            let k = order as i32;
            let c: T = factorial(order - 1);
            match y {
                Outcome::Zero if p < one => Some(c / (one - p).powi(k)),
                Outcome::One if p > T::zero() => {
                    let sign = if order.is_multiple_of(2) { one } else { -one };
                    Some(sign * c / p.powi(k))
                }
                _ => None,
            }
        }
        Builtin::Brier => Some(match (y, order) {
            (Outcome::Zero, 1) => two * p,
            (Outcome::One, 1) => -two * (one - p),
            (_, 2) => two,
            _ => T::zero(),
        }),
        Builtin::Spherical if order <= 4 => {
            // λ₁ = 1 − p/√u and λ₀(p) = λ₁(1 − p); u is symmetric about 1/2.
            let at = match y {
                Outcome::Zero => one - p,
                Outcome::One => p,
            };
            let u = two * at * at - two * at + one;
            let d1 = -spherical_numerator::<T>(order, at) / u.powf(lit(order as f64 + 0.5));
            Some(match y {
                Outcome::Zero if order % 2 == 1 => -d1,
                _ => d1,
            })
        }
        Builtin::Spherical => None,
    }
}

/// `λ(p, y)`.
pub fn loss<T: Scalar>(lf: &LossFunction<T>, p: T, y: Outcome) -> T {
    lf.eval(y, p)
}

/// `E_p λ(q, ·) = p·λ₁(q) + (1 − p)·λ₀(q)` with `0·∞ = 0`.
pub fn expected_loss<T: Scalar>(lf: &LossFunction<T>, p: T, q: T) -> T {
    mul_zero_inf(p, lf.lambda1(q)) + mul_zero_inf(T::one() - p, lf.lambda0(q))
}

/// Absolute tolerance on expected-loss comparisons.
pub const PROPRIETY_TOL: f64 = 1e-9;

/// A pair `(p, q)` where announcing `q` beats announcing the true `p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProprietyWitness<T> {
    pub p: T,
    pub q: T,
    /// `E_p λ(p,·) − E_p λ(q,·)`, positive.
    pub margin: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropernessReport<T> {
    pub proper: bool,
    pub strict: bool,
    pub witness: Option<ProprietyWitness<T>>,
    pub grid_size: usize,
}

/// Checks propriety on a uniform grid of `grid_size` interior points.
pub fn check_proper<T: Scalar>(lf: &LossFunction<T>, grid_size: usize) -> Result<PropernessReport<T>> {
    if grid_size < 3 {
        return Err(Error::OutOfRange(format!("grid_size = {grid_size} must be at least 3")));
    }
    let tol: T = lit(PROPRIETY_TOL);
    let denom = from_usize::<T>(grid_size + 1);
    let grid: Vec<T> = (1..=grid_size).map(|i| from_usize::<T>(i) / denom).collect();
    let mut strict = true;
    let mut worst: Option<ProprietyWitness<T>> = None;
    for &p in &grid {
        let truthful = expected_loss(lf, p, p);
        for &q in &grid {
            if q == p {
                continue;
            }
            let gap = expected_loss(lf, p, q) - truthful;
            if !(gap > tol) {
                strict = false;
            }
            if gap < -tol && worst.is_none_or(|w| -gap > w.margin) {
                worst = Some(ProprietyWitness { p, q, margin: -gap });
            }
        }
    }
    Ok(PropernessReport { proper: worst.is_none(), strict: worst.is_none() && strict, witness: worst, grid_size })
}

/// `λ₁′(p)/λ₀′(p) − (p − 1)/p`; vanishes for smooth proper losses.
pub fn slope_identity_residual<T: Scalar>(lf: &LossFunction<T>, p: T) -> Result<T> {
    if !(p > T::zero() && p < T::one()) {
        return Err(Error::OutOfRange(format!("p = {p} must lie in (0, 1)")));
    }
    let d0 = lf.derivative(Outcome::Zero, 1, p)?;
    let d1 = lf.derivative(Outcome::One, 1, p)?;
    if d0 == T::zero() {
        return Err(Error::VanishingDerivatives { p: p.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(d1 / d0 - (p - T::one()) / p)
}

/// Parses a loss in the DSL; see [`crate::dsl`] for the grammar.
pub fn parse_loss<T: Scalar>(text: &str) -> Result<LossFunction<T>> {
    LossFunction::parse(text)
}
