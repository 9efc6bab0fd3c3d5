//! Geometric invariants of a loss function's prediction curve
//! `p ↦ (λ₀(p), λ₁(p))`.
//!
//! Everything is expressed through the signed curvature `k_λ(p)` and its
//! ratio to the curvature of the log loss curve:
//!
//! * the mixability constant `η_λ = inf_p k_λ(p)/k_ln(p)`,
//! * the fundamentality constant `H_λ = sup_p k_λ(p)/k_ln(p)`,
//!
//! together with the endpoint degree and the criterion function
//! `(1 − p)·λ₀′(p)`, whose infimum is positive exactly for fundamental
//! losses.

use crate::error::{Error, Result};
use crate::loss::{LossFunction, Outcome};
use crate::scalar::{from_usize, lit, Scalar};
use crate::search::{scan, Goal, Scan};

/// Probe magnitude beyond which an endpoint trend counts as divergence.
pub const DIVERGENCE_THRESHOLD: f64 = 1e8;
/// Probe magnitude below which an endpoint trend counts as vanishing.
pub const VANISHING_THRESHOLD: f64 = 1e-8;
/// Grid size of the concavity check in [`is_eta_mixable`].
pub const CONCAVITY_GRID: usize = 4097;
/// Tolerance of the chord comparison in [`is_eta_mixable`].
pub const CONCAVITY_TOL: f64 = 1e-10;
/// Nonzero threshold for closed-form endpoint derivatives.
pub const DEGREE_TOL_CLOSED: f64 = 1e-7;
/// Relative nonzero threshold for finite-difference endpoint derivatives.
pub const DEGREE_TOL_NUMERIC: f64 = 1e-3;
/// Largest order [`degree`] accepts for losses without closed forms.
pub const MAX_NUMERIC_ORDER: u32 = 6;

fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn first_derivatives<T: Scalar>(lf: &LossFunction<T>, p: T) -> Result<[T; 4]> {
    Ok([
        lf.derivative(Outcome::Zero, 1, p)?,
        lf.derivative(Outcome::One, 1, p)?,
        lf.derivative(Outcome::Zero, 2, p)?,
        lf.derivative(Outcome::One, 2, p)?,
    ])
}

/// Signed curvature `(λ₀′λ₁″ − λ₁′λ₀″)/(λ₀′² + λ₁′²)^{3/2}` at `p`.
pub fn curvature<T: Scalar>(lf: &LossFunction<T>, p: T) -> Result<T> {
    let [d0, d1, dd0, dd1] = first_derivatives(lf, p)?;
    let speed2 = d0 * d0 + d1 * d1;
    if speed2 == T::zero() {
        return Err(Error::VanishingDerivatives { p: to_f64(p) });
    }
    Ok((d0 * dd1 - d1 * dd0) / speed2.powf(lit(1.5)))
}

/// Curvature of the log loss curve, `p(1 − p)/(p² + (1 − p)²)^{3/2}`.
pub fn log_curvature<T: Scalar>(p: T) -> T {
    let q = T::one() - p;
    p * q / (p * p + q * q).powf(lit(1.5))
}

/// `k_λ(p)/k_ln(p)`.
pub fn curvature_ratio<T: Scalar>(lf: &LossFunction<T>, p: T) -> Result<T> {
    let q = T::one() - p;
    Ok(curvature(lf, p)? * (p * p + q * q).powf(lit(1.5)) / (p * q))
}

/// `(λ₀′λ₁″ − λ₁′λ₀″)/(λ₀′λ₁′(λ₁′ − λ₀′))`, the curvature ratio rewritten
/// through the propriety identity; equals [`curvature_ratio`] for proper
/// losses.
pub fn slope_ratio<T: Scalar>(lf: &LossFunction<T>, p: T) -> Result<T> {
    let [d0, d1, dd0, dd1] = first_derivatives(lf, p)?;
    let den = d0 * d1 * (d1 - d0);
    if den == T::zero() {
        return Err(Error::VanishingDerivatives { p: to_f64(p) });
    }
    Ok((d0 * dd1 - d1 * dd0) / den)
}

/// `(1 − p)·λ₀′(p)`; equals `−p·λ₁′(p)` for proper losses.
pub fn criterion_function<T: Scalar>(lf: &LossFunction<T>, p: T) -> Result<T> {
    Ok((T::one() - p) * lf.derivative(Outcome::Zero, 1, p)?)
}

/// `−p·λ₁′(p)`.
pub fn criterion_function_dual<T: Scalar>(lf: &LossFunction<T>, p: T) -> Result<T> {
    Ok(-p * lf.derivative(Outcome::One, 1, p)?)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bound<T> {
    Finite(T),
    Unbounded,
}

impl<T: Scalar> Bound<T> {
    pub fn value(self) -> Option<T> {
        match self {
            Bound::Finite(v) => Some(v),
            Bound::Unbounded => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Bound::Finite(_))
    }
}

/// An infimum or supremum over the prediction range with the probe values
/// that decided how the endpoints were classified.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundEstimate<T> {
    pub kind: Bound<T>,
    /// Where the extreme value was found (the endpoint, if the bound is
    /// decided by an endpoint trend).
    pub at: T,
    /// `(p, value)` probes approaching the lower end, farthest first.
    pub near_lo: Vec<(T, T)>,
    /// `(p, value)` probes approaching the upper end, farthest first.
    pub near_hi: Vec<(T, T)>,
}

fn increasing_beyond<T: Scalar>(probes: &[(T, T)], threshold: T) -> bool {
    probes.len() >= 2
        && probes.windows(2).all(|w| w[1].1 > w[0].1)
        && probes.last().is_some_and(|&(_, v)| v > threshold)
}

fn decreasing_below<T: Scalar>(probes: &[(T, T)], threshold: T) -> bool {
    probes.len() >= 2
        && probes.windows(2).all(|w| w[1].1 < w[0].1)
        && probes.last().is_some_and(|&(_, v)| v < threshold)
}

/// Infimum of `f` over the loss's prediction range; a vanishing endpoint
/// trend is reported as `Finite(0)`.
pub fn infimum<T: Scalar, F>(lf: &LossFunction<T>, f: F) -> Result<BoundEstimate<T>>
where
    F: Fn(T) -> Result<T>,
{
    let (lo, hi) = lf.domain();
    let s = scan(f, lo, hi, lf.spans_unit_interval(), Goal::Minimize)?;
    Ok(classify_inf(s, lo, hi))
}

/// Supremum of `f` over the loss's prediction range; a diverging endpoint
/// trend is reported as `Unbounded`.
pub fn supremum<T: Scalar, F>(lf: &LossFunction<T>, f: F) -> Result<BoundEstimate<T>>
where
    F: Fn(T) -> Result<T>,
{
    let (lo, hi) = lf.domain();
    let s = scan(f, lo, hi, lf.spans_unit_interval(), Goal::Maximize)?;
    Ok(classify_sup(s, lo, hi))
}

fn classify_inf<T: Scalar>(s: Scan<T>, lo: T, hi: T) -> BoundEstimate<T> {
    let thr: T = lit(VANISHING_THRESHOLD);
    let (kind, at) = if decreasing_below(&s.near_lo, thr) {
        (Bound::Finite(T::zero()), lo)
    } else if decreasing_below(&s.near_hi, thr) {
        (Bound::Finite(T::zero()), hi)
    } else {
        (Bound::Finite(s.value), s.at)
    };
    BoundEstimate { kind, at, near_lo: s.near_lo, near_hi: s.near_hi }
}

fn classify_sup<T: Scalar>(s: Scan<T>, lo: T, hi: T) -> BoundEstimate<T> {
    let thr: T = lit(DIVERGENCE_THRESHOLD);
    let (kind, at) = if increasing_beyond(&s.near_lo, thr) {
        (Bound::Unbounded, lo)
    } else if increasing_beyond(&s.near_hi, thr) {
        (Bound::Unbounded, hi)
    } else {
        (Bound::Finite(s.value), s.at)
    };
    BoundEstimate { kind, at, near_lo: s.near_lo, near_hi: s.near_hi }
}

/// `η_λ = inf_p k_λ(p)/k_ln(p)`.
pub fn mixability_constant<T: Scalar>(lf: &LossFunction<T>) -> Result<BoundEstimate<T>> {
    infimum(lf, |p| curvature_ratio(lf, p))
}

/// `H_λ = sup_p k_λ(p)/k_ln(p)`.
pub fn fundamentality_constant<T: Scalar>(lf: &LossFunction<T>) -> Result<BoundEstimate<T>> {
    supremum(lf, |p| curvature_ratio(lf, p))
}

/// The degree: smallest `k` with `λ₀^{(k)}(0) ≠ 0` and `λ₁^{(k)}(1) ≠ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Degree {
    Finite(u32),
    /// No order up to the given one qualified.
    Exceeds(u32),
}

impl std::fmt::Display for Degree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Degree::Finite(k) => write!(f, "{k}"),
            Degree::Exceeds(k) => write!(f, "> {k}"),
        }
    }
}

/// Endpoint derivatives `(k, λ₀^{(k)}(0), λ₁^{(k)}(1))`.
#[derive(Clone, Debug, PartialEq)]
pub struct DegreeResult<T> {
    pub degree: Degree,
    pub derivatives: Vec<(u32, T, T)>,
}

/// Detects the degree by inspecting one-sided endpoint derivatives up to
/// `max_order`.
pub fn degree<T: Scalar>(lf: &LossFunction<T>, max_order: u32) -> Result<DegreeResult<T>> {
    if max_order == 0 {
        return Err(Error::OutOfRange("max_order must be positive".into()));
    }
    if !lf.has_closed_form_derivatives(max_order) && max_order > MAX_NUMERIC_ORDER {
        return Err(Error::OutOfRange(format!(
            "max_order = {max_order} exceeds {MAX_NUMERIC_ORDER} for finite-difference derivatives"
        )));
    }
    let (lo, hi) = lf.domain();
    let half: T = lit(0.5);
    let mut derivatives = Vec::new();
    for k in 1..=max_order {
        let d0 = lf.derivative(Outcome::Zero, k, lo)?;
        let d1 = lf.derivative(Outcome::One, k, hi)?;
        derivatives.push((k, d0, d1));
        let nonzero = |y: Outcome, d: T| -> Result<bool> {
            if lf.has_closed_form_derivatives(k) {
                Ok(d.abs() > lit(DEGREE_TOL_CLOSED))
            } else {
                let scale = lf.derivative(y, k, (lo + hi) * half)?.abs().max(T::one());
                Ok(d.abs() > lit::<T>(DEGREE_TOL_NUMERIC) * scale)
            }
        };
        if nonzero(Outcome::Zero, d0)? && nonzero(Outcome::One, d1)? {
            return Ok(DegreeResult { degree: Degree::Finite(k), derivatives });
        }
    }
    Ok(DegreeResult { degree: Degree::Exceeds(max_order), derivatives })
}

/// Whether the image of the superprediction set under
/// `(x, y) ↦ (e^{−ηx}, e^{−ηy})` is convex, i.e. the mapped prediction curve
/// is concave.
///
/// Each grid point is compared with the chord through the points `s` steps
/// to either side, for `s = 1, 2, 4, …`; wide chords expose slight
/// non-concavity that adjacent points are too close to resolve.
pub fn is_eta_mixable<T: Scalar>(lf: &LossFunction<T>, eta: T) -> bool {
    if !(eta > T::zero()) {
        return false;
    }
    let (lo, hi) = lf.domain();
    let n = CONCAVITY_GRID;
    let last = from_usize::<T>(n - 1);
    let pts: Vec<(T, T)> = (0..n)
        .map(|j| {
            let p = lo + (hi - lo) * from_usize::<T>(j) / last;
            ((-eta * lf.lambda0(p)).exp(), (-eta * lf.lambda1(p)).exp())
        })
        .collect();
    if pts.iter().any(|(u, v)| u.is_nan() || v.is_nan()) {
        return false;
    }
    let tol: T = lit(CONCAVITY_TOL);
    let mut stride = 1;
    while 2 * stride < n {
        for i in stride..n - stride {
            let (ua, va) = pts[i - stride];
            let (ub, vb) = pts[i];
            let (uc, vc) = pts[i + stride];
            let span = ua - uc;
            if !(span > T::zero()) {
                continue;
            }
            let chord = vc + (va - vc) * (ub - uc) / span;
            if vb < chord - tol {
                return false;
            }
        }
        stride *= 2;
    }
    true
}

/// The loss with predictions clamped to `[eps, 1 − eps]`.
pub fn truncate<T: Scalar>(lf: &LossFunction<T>, eps: T) -> Result<LossFunction<T>> {
    lf.truncate(eps)
}

/// `max(sup k_λ/k_Λ, sup k_Λ/k_λ)` over `[eps, 1 − eps]`: the factor within
/// which deficiencies under the two losses agree once predictions are
/// truncated.
pub fn equivalence_factor<T: Scalar>(lf: &LossFunction<T>, lg: &LossFunction<T>, eps: T) -> Result<T> {
    if !(eps > T::zero() && eps < lit(0.5)) {
        return Err(Error::OutOfRange(format!("eps = {eps} must lie in (0, 0.5)")));
    }
    let (lo, hi) = (eps, T::one() - eps);
    let forward = scan(|p| Ok(curvature(lf, p)? / curvature(lg, p)?), lo, hi, false, Goal::Maximize)?;
    let backward = scan(|p| Ok(curvature(lg, p)? / curvature(lf, p)?), lo, hi, false, Goal::Maximize)?;
    Ok(forward.value.max(backward.value))
}

/// One row of a curvature table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvaturePoint<T> {
    pub p: T,
    pub curvature: T,
    pub log_curvature: T,
    pub ratio: T,
    pub criterion: T,
}

/// Curvature, log curvature, their ratio and the criterion function on a
/// grid of `points` interior points of the prediction range.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureProfile<T> {
    pub points: Vec<CurvaturePoint<T>>,
}

pub fn curvature_profile<T: Scalar>(lf: &LossFunction<T>, points: usize) -> Result<CurvatureProfile<T>> {
    let (lo, hi) = lf.domain();
    let denom = from_usize::<T>(points + 1);
    let points = (1..=points)
        .map(|i| {
            let p = lo + (hi - lo) * from_usize::<T>(i) / denom;
            Ok(CurvaturePoint {
                p,
                curvature: curvature(lf, p)?,
                log_curvature: log_curvature(p),
                ratio: curvature_ratio(lf, p)?,
                criterion: criterion_function(lf, p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CurvatureProfile { points })
}
