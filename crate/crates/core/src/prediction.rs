//! Data sequences, prediction algorithms and (super)loss processes.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::loss::{LossFunction, Outcome};
use crate::scalar::{from_usize, lit, Scalar};

/// One observation `z_t = (x_t, y_t)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Observation {
    pub object: usize,
    pub label: Outcome,
}

impl Observation {
    pub fn new(object: usize, label: Outcome) -> Self {
        Observation { object, label }
    }

    pub fn label(label: Outcome) -> Self {
        Observation { object: 0, label }
    }
}

/// A finite sequence of observations over the object space `0..object_space`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataSequence {
    object_space: usize,
    items: Vec<Observation>,
}

impl DataSequence {
    pub fn new(object_space: usize, items: Vec<Observation>) -> Result<Self> {
        if object_space == 0 {
            return Err(Error::OutOfRange("object space must be nonempty".into()));
        }
        if let Some((t, o)) = items.iter().enumerate().find(|(_, o)| o.object >= object_space) {
            return Err(Error::OutOfRange(format!(
                "object {} at step {} is outside the object space 0..{object_space}",
                o.object,
                t + 1
            )));
        }
        Ok(DataSequence { object_space, items })
    }

    /// Labels only; every object is `0`.
    pub fn from_labels(labels: impl IntoIterator<Item = Outcome>) -> Self {
        DataSequence { object_space: 1, items: labels.into_iter().map(Observation::label).collect() }
    }

    pub fn zeros(len: usize) -> Self {
        Self::from_labels(std::iter::repeat_n(Outcome::Zero, len))
    }

    /// Parses the label-sequence text format: one observation per line,
    /// either `label` or `object,label`; `#` lines and blank lines skipped.
    /// The object space is `0..=max object`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut items = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fail = |message: String| Error::Parse { line: n + 1, message };
            let (object, label) = match line.split_once(',') {
                Some((o, l)) => {
                    let o = o.trim().parse::<usize>().map_err(|_| fail(format!("bad object `{}`", o.trim())))?;
                    (o, l.trim())
                }
                None => (0, line),
            };
            let label = match label {
                "0" => Outcome::Zero,
                "1" => Outcome::One,
                other => return Err(fail(format!("label must be 0 or 1, got `{other}`"))),
            };
            items.push(Observation { object, label });
        }
        let object_space = items.iter().map(|o| o.object + 1).max().unwrap_or(1);
        DataSequence::new(object_space, items)
    }

    pub fn object_space(&self) -> usize {
        self.object_space
    }

    pub fn items(&self) -> &[Observation] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn prefix(&self, t: usize) -> &[Observation] {
        &self.items[..t]
    }
}

impl fmt::Display for DataSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for o in &self.items {
            if self.object_space > 1 {
                writeln!(f, "{},{}", o.object, o.label)?;
            } else {
                writeln!(f, "{}", o.label)?;
            }
        }
        Ok(())
    }
}

/// A deterministic prediction algorithm `F: Z* × X → [0, 1]`.
pub trait PredictionAlgorithm<T: Scalar>: Send + Sync {
    fn name(&self) -> String;

    /// Prediction for the label of `next_object` after `history`.
    fn predict(&self, history: &[Observation], next_object: usize) -> T;

    /// Predictions `F(z_1..z_{t-1}, x_t)` for every step of `seq`.
    fn predict_sequence(&self, seq: &[Observation]) -> Vec<T> {
        (0..seq.len()).map(|t| self.predict(&seq[..t], seq[t].object)).collect()
    }
}

/// Shared handle to a prediction algorithm.
pub type Algorithm<T> = Arc<dyn PredictionAlgorithm<T>>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constant<T>(pub T);

impl<T: Scalar> PredictionAlgorithm<T> for Constant<T> {
    fn name(&self) -> String {
        format!("const:{}", self.0)
    }

    fn predict(&self, _: &[Observation], _: usize) -> T {
        self.0
    }

    fn predict_sequence(&self, seq: &[Observation]) -> Vec<T> {
        vec![self.0; seq.len()]
    }
}

/// Laplace's rule of succession, `(ones + 1)/(n + 2)` after `n` labels.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Laplace;

impl<T: Scalar> PredictionAlgorithm<T> for Laplace {
    fn name(&self) -> String {
        "laplace".into()
    }

    fn predict(&self, history: &[Observation], _: usize) -> T {
        let ones = history.iter().filter(|o| o.label == Outcome::One).count();
        from_usize::<T>(ones + 1) / from_usize::<T>(history.len() + 2)
    }

    fn predict_sequence(&self, seq: &[Observation]) -> Vec<T> {
        let mut ones = 0;
        seq.iter()
            .enumerate()
            .map(|(n, o)| {
                let p = from_usize::<T>(ones + 1) / from_usize::<T>(n + 2);
                if o.label == Outcome::One {
                    ones += 1;
                }
                p
            })
            .collect()
    }
}

/// Predicts `p_t = (t + 1)^{−1/k − ε}` at step `t = 1, 2, …`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerPredictor<T> {
    pub k: u32,
    pub eps: T,
}

impl<T: Scalar> PowerPredictor<T> {
    pub fn new(k: u32, eps: T) -> Result<Self> {
        if k == 0 || !(eps > T::zero()) {
            return Err(Error::OutOfRange(format!("power predictor needs k >= 1 and eps > 0 (k = {k}, eps = {eps})")));
        }
        Ok(PowerPredictor { k, eps })
    }

    pub fn exponent(&self) -> T {
        T::one() / from_usize::<T>(self.k as usize) + self.eps
    }

    /// Prediction at step `t` (1-based).
    pub fn at_step(&self, t: usize) -> T {
        from_usize::<T>(t + 1).powf(-self.exponent())
    }
}

impl<T: Scalar> PredictionAlgorithm<T> for PowerPredictor<T> {
    fn name(&self) -> String {
        format!("power:{}:{}", self.k, self.eps)
    }

    fn predict(&self, history: &[Observation], _: usize) -> T {
        self.at_step(history.len() + 1)
    }

    fn predict_sequence(&self, seq: &[Observation]) -> Vec<T> {
        (1..=seq.len()).map(|t| self.at_step(t)).collect()
    }
}

/// Replays a fixed table of predictions; steps past the end reuse the last
/// entry.
#[derive(Clone, Debug, PartialEq)]
pub struct TablePredictor<T> {
    values: Vec<T>,
}

impl<T: Scalar> TablePredictor<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::OutOfRange("prediction table is empty".into()));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= T::zero() && **v <= T::one())) {
            return Err(Error::OutOfRange(format!("table prediction {v} outside [0, 1]")));
        }
        Ok(TablePredictor { values })
    }

    /// One probability per line; `#` lines and blank lines skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let v: f64 =
                line.parse().map_err(|_| Error::Parse { line: n + 1, message: format!("bad probability `{line}`") })?;
            values.push(lit(v));
        }
        Self::new(values)
    }
}

impl<T: Scalar> PredictionAlgorithm<T> for TablePredictor<T> {
    fn name(&self) -> String {
        format!("table[{}]", self.values.len())
    }

    fn predict(&self, history: &[Observation], _: usize) -> T {
        self.values[history.len().min(self.values.len() - 1)]
    }
}

/// Clamps another algorithm's predictions to `[eps, 1 − eps]`.
#[derive(Clone)]
pub struct Clamped<T: Scalar> {
    inner: Algorithm<T>,
    eps: T,
}

impl<T: Scalar> Clamped<T> {
    pub fn new(inner: Algorithm<T>, eps: T) -> Self {
        Clamped { inner, eps }
    }

    fn clamp(&self, p: T) -> T {
        p.max(self.eps).min(T::one() - self.eps)
    }
}

impl<T: Scalar> PredictionAlgorithm<T> for Clamped<T> {
    fn name(&self) -> String {
        format!("clamp({},{})", self.inner.name(), self.eps)
    }

    fn predict(&self, history: &[Observation], next_object: usize) -> T {
        self.clamp(self.inner.predict(history, next_object))
    }

    fn predict_sequence(&self, seq: &[Observation]) -> Vec<T> {
        self.inner.predict_sequence(seq).into_iter().map(|p| self.clamp(p)).collect()
    }
}

/// Cumulative losses of an algorithm along a sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct LossTrace<T> {
    pub loss_name: String,
    /// `cumulative[t]` is the loss over the first `t` steps; `cumulative[0] = 0`.
    pub cumulative: Vec<T>,
    /// Prediction made at each step.
    pub predictions: Vec<T>,
}

impl<T: Scalar> LossTrace<T> {
    pub fn final_loss(&self) -> T {
        *self.cumulative.last().unwrap()
    }

    /// The trace as a process tree: the realized path plus, at every step,
    /// the value the process would have taken on the other label.
    pub fn process_tree(&self, sigma: &DataSequence, lf: &LossFunction<T>) -> ProcessTree<T> {
        let branches: Vec<[T; 2]> = self
            .predictions
            .iter()
            .zip(&self.cumulative)
            .map(|(&p, &base)| [base + lf.lambda0(p), base + lf.lambda1(p)])
            .collect();
        ProcessTree::from_path(sigma.items(), &self.cumulative, &branches)
    }
}

/// `Loss_F^λ(σ^t)` for every prefix of `sigma`.
pub fn cumulative_loss<T: Scalar>(
    algorithm: &dyn PredictionAlgorithm<T>,
    sigma: &DataSequence,
    lf: &LossFunction<T>,
) -> LossTrace<T> {
    let predictions = algorithm.predict_sequence(sigma.items());
    let mut cumulative = Vec::with_capacity(predictions.len() + 1);
    let mut total = T::zero();
    cumulative.push(total);
    for (o, &p) in sigma.items().iter().zip(&predictions) {
        total = total + lf.eval(o.label, p);
        cumulative.push(total);
    }
    LossTrace { loss_name: lf.name().to_string(), cumulative, predictions }
}

/// A pair of losses `(a, b)`: `a` if the label is `0`, `b` if it is `1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuperpredictionPoint<T> {
    pub a: T,
    pub b: T,
}

impl<T> SuperpredictionPoint<T> {
    pub fn new(a: T, b: T) -> Self {
        SuperpredictionPoint { a, b }
    }
}

/// Loss tolerance of [`is_superprediction`].
pub const SUPERPREDICTION_TOL: f64 = 1e-9;

/// Whether `pt` lies Northeast of the prediction set: `λ₀(p) ≤ a` and
/// `λ₁(p) ≤ b` for some `p`.
pub fn is_superprediction<T: Scalar>(lf: &LossFunction<T>, pt: SuperpredictionPoint<T>) -> bool {
    let tol: T = lit(SUPERPREDICTION_TOL);
    if pt.a.is_nan() || pt.b.is_nan() {
        return false;
    }
    // λ₀ is nondecreasing, λ₁ nonincreasing: the best candidate is the
    // largest p with λ₀(p) ≤ a.
    let (mut lo, mut hi) = (T::zero(), T::one());
    if lf.lambda0(lo) > pt.a + tol {
        return false;
    }
    let best = if lf.lambda0(hi) <= pt.a {
        hi
    } else {
        for _ in 0..200 {
            let mid = (lo + hi) / lit(2.0);
            if mid == lo || mid == hi {
                break;
            }
            if lf.lambda0(mid) <= pt.a {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    lf.lambda1(best) <= pt.b + tol
}

/// A process `L` given on a prefix-closed finite set of sequences.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProcessTree<T> {
    nodes: BTreeMap<Vec<Observation>, T>,
}

/// The first node at which a process fails to be a superloss process.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperlossViolation<T> {
    pub node: Vec<Observation>,
    pub object: usize,
    pub increments: SuperpredictionPoint<T>,
}

impl<T: Scalar> ProcessTree<T> {
    pub fn new() -> Self {
        ProcessTree { nodes: BTreeMap::new() }
    }

    pub fn insert(&mut self, node: Vec<Observation>, value: T) {
        self.nodes.insert(node, value);
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn get(&self, node: &[Observation]) -> Option<T> {
        self.nodes.get(node).copied()
    }

    /// Builds the tree of a path: `values[t]` is `L(σ^t)` and `branches[t]`
    /// holds `L(σ^t, x_{t+1}, y)` for `y = 0, 1`.
    pub fn from_path(path: &[Observation], values: &[T], branches: &[[T; 2]]) -> Self {
        let mut tree = ProcessTree::new();
        for t in 0..=path.len() {
            tree.insert(path[..t].to_vec(), values[t]);
        }
        for (t, br) in branches.iter().enumerate().take(path.len()) {
            for y in Outcome::BOTH {
                let mut node = path[..t].to_vec();
                node.push(Observation::new(path[t].object, y));
                tree.nodes.entry(node).or_insert(br[y.bit() as usize]);
            }
        }
        tree
    }
}

fn increment<T: Scalar>(parent: T, child: Option<T>) -> T {
    match child {
        None => T::infinity(),
        Some(c) if parent == T::infinity() => {
            if c == T::infinity() {
                T::infinity()
            } else {
                T::neg_infinity()
            }
        }
        Some(c) => c - parent,
    }
}

/// Checks that every increment pair `(L(σ,x,0) − L(σ), L(σ,x,1) − L(σ))`
/// is a superprediction. A missing sibling leaves its branch unconstrained.
pub fn verify_superloss<T: Scalar>(
    tree: &ProcessTree<T>,
    lf: &LossFunction<T>,
) -> Result<Option<SuperlossViolation<T>>> {
    let mut groups: HashMap<(&[Observation], usize), [Option<T>; 2]> = HashMap::new();
    for (node, &value) in &tree.nodes {
        let Some((last, parent)) = node.split_last() else { continue };
        if !tree.nodes.contains_key(parent) {
            return Err(Error::NotPrefixClosed { len: node.len() });
        }
        groups.entry((parent, last.object)).or_default()[last.label.bit() as usize] = Some(value);
    }
    let mut keys: Vec<_> = groups.keys().copied().collect();
    keys.sort_by(|a, b| (a.0.len(), a.0, a.1).cmp(&(b.0.len(), b.0, b.1)));
    for key in keys {
        let parent_value = tree.nodes[key.0];
        let [c0, c1] = groups[&key];
        let pt = SuperpredictionPoint::new(increment(parent_value, c0), increment(parent_value, c1));
        if !is_superprediction(lf, pt) {
            return Ok(Some(SuperlossViolation { node: key.0.to_vec(), object: key.1, increments: pt }));
        }
    }
    Ok(None)
}

/// Maps a λ-superprediction to a log-loss superprediction via the affine map
/// that scales by `η` and moves `η·λ(p)` onto the log loss curve point at `p`.
pub fn thm1_transform<T: Scalar>(
    lf: &LossFunction<T>,
    eta: T,
    p: T,
    pt: SuperpredictionPoint<T>,
) -> Result<SuperpredictionPoint<T>> {
    if !(p > T::zero() && p < T::one()) {
        return Err(Error::OutOfRange(format!("p = {p} must lie in (0, 1)")));
    }
    Ok(SuperpredictionPoint {
        a: eta * pt.a - (T::one() - p).ln() - eta * lf.lambda0(p),
        b: eta * pt.b - p.ln() - eta * lf.lambda1(p),
    })
}

/// `P(y_1..y_T) = Π p̄_t`, the probability `F` assigns to the labels of `sigma`.
pub fn induced_measure<T: Scalar>(algorithm: &dyn PredictionAlgorithm<T>, sigma: &DataSequence) -> T {
    log_induced_measure(algorithm, sigma).exp()
}

/// `ln P(y_1..y_T)`, accumulated in log space.
pub fn log_induced_measure<T: Scalar>(algorithm: &dyn PredictionAlgorithm<T>, sigma: &DataSequence) -> T {
    algorithm
        .predict_sequence(sigma.items())
        .into_iter()
        .zip(sigma.items())
        .map(|(p, o)| o.label.probability_under(p).ln())
        .sum()
}
