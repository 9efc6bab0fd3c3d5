//! Pool-relative predictive complexity and randomness deficiency.
//!
//! Exact predictive complexity is not computable. Its stand-in here is the
//! Aggregating Algorithm mixture over a finite, prior-weighted pool of
//! prediction algorithms,
//!
//! ```text
//! L̂(σ) = −(1/η) ln Σ_i w_i exp(−η Loss_i(σ)),
//! ```
//!
//! which is a superloss process whenever the loss is η-mixable and
//! dominates every pool member up to its prior cost `−ln(w_i)/η`. All
//! deficiencies computed here are relative to the chosen pool.

use crate::error::{Error, Result};
use crate::geometry::mixability_constant;
use crate::loss::{LossFunction, Outcome};
use crate::prediction::{Algorithm, DataSequence, LossTrace, PredictionAlgorithm, ProcessTree};
use crate::scalar::{from_usize, lit, log_sum_exp, Scalar};

/// Slack allowed above the mixability constant.
pub const ETA_SLACK: f64 = 1e-9;
/// Tail variation (in loss units) below which a deficiency counts as bounded.
pub const BOUNDED_THRESHOLD: f64 = 0.5;
/// Default fraction of the trace used by growth fits.
pub const DEFAULT_TAIL_FRACTION: f64 = 0.5;
/// Minimum number of tail points for a growth fit.
pub const MIN_FIT_POINTS: usize = 100;

/// Prior-weighted prediction algorithms.
#[derive(Clone)]
pub struct ExpertPool<T: Scalar> {
    experts: Vec<Algorithm<T>>,
    weights: Vec<T>,
}

impl<T: Scalar> std::fmt::Debug for ExpertPool<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let names: Vec<String> = self.experts.iter().map(|e| e.name()).collect();
        f.debug_struct("ExpertPool").field("experts", &names).field("weights", &self.weights).finish()
    }
}

impl<T: Scalar> ExpertPool<T> {
    pub fn new(experts: Vec<Algorithm<T>>, weights: Vec<T>) -> Result<Self> {
        if experts.is_empty() {
            return Err(Error::InvalidPool("pool is empty".into()));
        }
        if experts.len() != weights.len() {
            return Err(Error::InvalidPool(format!("{} experts but {} weights", experts.len(), weights.len())));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > T::zero())) {
            return Err(Error::InvalidPool(format!("weight {w} is not positive")));
        }
        let total: T = weights.iter().copied().sum();
        let tol = lit::<T>(1e-12).max(T::epsilon() * from_usize(16 * weights.len()));
        if (total - T::one()).abs() > tol {
            return Err(Error::InvalidPool(format!("weights sum to {total}, not 1")));
        }
        Ok(ExpertPool { experts, weights })
    }

    pub fn uniform(experts: Vec<Algorithm<T>>) -> Result<Self> {
        let w = T::one() / from_usize::<T>(experts.len().max(1));
        let weights = vec![w; experts.len()];
        Self::new(experts, weights)
    }

    pub fn experts(&self) -> &[Algorithm<T>] {
        &self.experts
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.experts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.experts.is_empty()
    }
}

/// The mixture superloss process along a sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct MixtureTrace<T> {
    pub loss_name: String,
    pub eta: T,
    /// `values[t] = L̂(σ^t)`; `values[0] = 0`.
    pub values: Vec<T>,
    /// `branches[t][y] = L̂(σ^t, x_{t+1}, y)`.
    pub branches: Vec<[T; 2]>,
    /// Cumulative loss of every expert, one trace per pool member.
    pub expert_losses: Vec<Vec<T>>,
}

impl<T: Scalar> MixtureTrace<T> {
    pub fn final_value(&self) -> T {
        *self.values.last().unwrap()
    }

    pub fn process_tree(&self, sigma: &DataSequence) -> ProcessTree<T> {
        ProcessTree::from_path(sigma.items(), &self.values, &self.branches)
    }
}

/// Runs the Aggregating Algorithm mixture after checking `eta` against the
/// loss's mixability constant.
pub fn aa_mixture<T: Scalar>(
    pool: &ExpertPool<T>,
    lf: &LossFunction<T>,
    eta: T,
    sigma: &DataSequence,
) -> Result<MixtureTrace<T>> {
    let mixability = mixability_constant(lf)?.kind.value().unwrap_or(T::zero());
    check_eta(eta, mixability)?;
    Ok(aa_mixture_unchecked(pool, lf, eta, sigma))
}

fn check_eta<T: Scalar>(eta: T, mixability: T) -> Result<()> {
    if !(eta > T::zero()) || eta > mixability + lit(ETA_SLACK) {
        return Err(Error::EtaExceedsMixability {
            eta: eta.to_f64().unwrap_or(f64::NAN),
            mixability: mixability.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// The mixture without the mixability check; callers that already know
/// `eta` is admissible avoid recomputing the constant.
pub fn aa_mixture_unchecked<T: Scalar>(
    pool: &ExpertPool<T>,
    lf: &LossFunction<T>,
    eta: T,
    sigma: &DataSequence,
) -> MixtureTrace<T> {
    let log_w: Vec<T> = pool.weights.iter().map(|w| w.ln()).collect();
    let predictions: Vec<Vec<T>> = pool.experts.iter().map(|e| e.predict_sequence(sigma.items())).collect();
    let k = pool.len();
    let steps = sigma.len();
    let mut losses = vec![T::zero(); k];
    let mut expert_losses: Vec<Vec<T>> = (0..k)
        .map(|_| {
            let mut v = Vec::with_capacity(steps + 1);
            v.push(T::zero());
            v
        })
        .collect();
    let mut values = Vec::with_capacity(steps + 1);
    let mut branches = Vec::with_capacity(steps);
    values.push(-log_sum_exp(log_w.iter().copied()) / eta);
    let mut step_losses = vec![[T::zero(); 2]; k];
    for (t, obs) in sigma.items().iter().enumerate() {
        for i in 0..k {
            let p = predictions[i][t];
            step_losses[i] = [lf.eval(Outcome::Zero, p), lf.eval(Outcome::One, p)];
        }
        let mut branch = [T::zero(); 2];
        for y in 0..2 {
            let terms = (0..k).map(|i| log_w[i] - eta * (losses[i] + step_losses[i][y]));
            branch[y] = -log_sum_exp(terms) / eta;
        }
        let y = obs.label.bit() as usize;
        for i in 0..k {
            losses[i] = losses[i] + step_losses[i][y];
            expert_losses[i].push(losses[i]);
        }
        values.push(branch[y]);
        branches.push(branch);
    }
    MixtureTrace { loss_name: lf.name().to_string(), eta, values, branches, expert_losses }
}

/// `D̂(T) = Loss_F(σ^T) − L̂(σ^T)` together with both terms.
#[derive(Clone, Debug, PartialEq)]
pub struct DeficiencyTrace<T> {
    pub loss_f: Vec<T>,
    pub mixture: Vec<T>,
    /// `values[t]` for `t = 0..=T`.
    pub values: Vec<T>,
}

impl<T: Scalar> DeficiencyTrace<T> {
    /// A trace with only deficiency values (index = step).
    pub fn from_values(values: Vec<T>) -> Self {
        DeficiencyTrace { loss_f: Vec::new(), mixture: Vec::new(), values }
    }

    pub fn horizon(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    pub fn final_value(&self) -> T {
        *self.values.last().unwrap()
    }

    /// Combines a loss trace with a mixture trace over the same sequence.
    pub fn from_traces(loss: &LossTrace<T>, mixture: &MixtureTrace<T>) -> Result<Self> {
        let values = loss
            .cumulative
            .iter()
            .zip(&mixture.values)
            .enumerate()
            .map(|(t, (&l, &m))| {
                if l == T::infinity() && m == T::infinity() {
                    Err(Error::IndeterminateDeficiency { step: t })
                } else {
                    Ok(l - m)
                }
            })
            .collect::<Result<Vec<T>>>()?;
        Ok(DeficiencyTrace { loss_f: loss.cumulative.clone(), mixture: mixture.values.clone(), values })
    }
}

/// Pool-relative randomness deficiency of `sigma` with respect to `algorithm`.
pub fn deficiency<T: Scalar>(
    algorithm: &dyn PredictionAlgorithm<T>,
    pool: &ExpertPool<T>,
    lf: &LossFunction<T>,
    eta: T,
    sigma: &DataSequence,
) -> Result<DeficiencyTrace<T>> {
    let mixture = aa_mixture(pool, lf, eta, sigma)?;
    let loss = crate::prediction::cumulative_loss(algorithm, sigma, lf);
    DeficiencyTrace::from_traces(&loss, &mixture)
}

/// Power law `D(T) ≈ amplitude · T^exponent` fitted over `[t_lo, t_hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthFit<T> {
    pub exponent: T,
    pub amplitude: T,
    pub t_lo: usize,
    pub t_hi: usize,
    /// Root-mean-square residual in log space.
    pub residual: T,
}

/// Least-squares fit of `ln D(T) = ln c + α ln T` over the last
/// `tail_fraction` of the trace.
pub fn fit_growth<T: Scalar>(trace: &DeficiencyTrace<T>, tail_fraction: T) -> Result<GrowthFit<T>> {
    if !(tail_fraction > T::zero() && tail_fraction <= T::one()) {
        return Err(Error::OutOfRange(format!("tail_fraction = {tail_fraction} must lie in (0, 1]")));
    }
    let n = trace.horizon();
    let skipped = (from_usize::<T>(n) * (T::one() - tail_fraction)).floor().to_usize().unwrap_or(0);
    let t_lo = (skipped + 1).max(1);
    let count = (n + 1).saturating_sub(t_lo);
    if count < MIN_FIT_POINTS {
        return Err(Error::ShortTrace { needed: MIN_FIT_POINTS, got: count });
    }
    let tail = &trace.values[t_lo..=n];
    if let Some(i) = tail.iter().position(|d| !(*d > T::zero() && d.is_finite())) {
        return Err(Error::NonPositiveDeficiency { step: t_lo + i });
    }
    let (lo, hi) = tail.iter().fold((T::infinity(), T::neg_infinity()), |(a, b), &d| (a.min(d), b.max(d)));
    if hi - lo <= lit::<T>(1e-9) * hi.abs().max(T::one()) {
        return Err(Error::BoundedDeficiency);
    }
    let m = from_usize::<T>(count);
    let xs = (t_lo..=n).map(|t| from_usize::<T>(t).ln());
    let ys = tail.iter().map(|d| d.ln());
    let mean_x = xs.clone().sum::<T>() / m;
    let mean_y = ys.clone().sum::<T>() / m;
    let (sxy, sxx) = xs.clone().zip(ys.clone()).fold((T::zero(), T::zero()), |(sxy, sxx), (x, y)| {
        (sxy + (x - mean_x) * (y - mean_y), sxx + (x - mean_x) * (x - mean_x))
    });
    let exponent = sxy / sxx;
    let intercept = mean_y - exponent * mean_x;
    let sse: T = xs.zip(ys).map(|(x, y)| (y - intercept - exponent * x).powi(2)).sum();
    Ok(GrowthFit { exponent, amplitude: intercept.exp(), t_lo, t_hi: n, residual: (sse / m).sqrt() })
}

/// Whether a deficiency trace looks bounded or growing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Verdict<T> {
    Bounded,
    /// Growing; the fit is absent when the tail is not strictly positive.
    Growing(Option<GrowthFit<T>>),
}

impl<T> Verdict<T> {
    pub fn is_bounded(&self) -> bool {
        matches!(self, Verdict::Bounded)
    }
}

/// Bounded if the deficiency rises by less than [`BOUNDED_THRESHOLD`] over
/// the last half of the trace; growing (with a power-law fit) otherwise.
pub fn randomness_verdict<T: Scalar>(trace: &DeficiencyTrace<T>) -> Verdict<T> {
    let n = trace.horizon();
    let half = n / 2;
    let start = trace.values[half];
    let peak = trace.values[half..].iter().copied().fold(T::neg_infinity(), T::max);
    if peak - start < lit(BOUNDED_THRESHOLD) {
        Verdict::Bounded
    } else {
        Verdict::Growing(fit_growth(trace, lit(DEFAULT_TAIL_FRACTION)).ok())
    }
}

/// Outcome of checking `lhs(T) ≤ rhs(T) + c` with `c` fitted on a prefix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DominanceReport<T> {
    /// Fitted additive constant, `max(0, max_{fit range} lhs − rhs)`.
    pub constant: T,
    /// Largest `lhs − rhs − c` over the checked range (≤ 0 when it holds).
    pub worst_excess: T,
    pub holds: bool,
}

/// Fits `c` over steps `t_min..=fit_until` and checks `lhs ≤ rhs + c` for
/// every step from `t_min` on.
pub fn fit_dominance<T: Scalar>(lhs: &[T], rhs: &[T], t_min: usize, fit_until: usize) -> DominanceReport<T> {
    let n = lhs.len().min(rhs.len());
    let gap = |t: usize| lhs[t] - rhs[t];
    let fit_end = fit_until.min(n.saturating_sub(1));
    let constant = (t_min..=fit_end).map(gap).fold(T::zero(), T::max);
    let worst_excess = (t_min..n).map(|t| gap(t) - constant).fold(T::neg_infinity(), T::max);
    let tol = lit::<T>(1e-9) * constant.abs().max(T::one());
    DominanceReport { constant, worst_excess, holds: worst_excess <= tol }
}
