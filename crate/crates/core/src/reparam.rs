//! Proper parameterization of a sampled prediction curve.
//!
//! A prediction set can be re-indexed so that the point assigned to `p` is
//! the one minimizing `p·y + (1 − p)·x`. On a smooth convex curve that is
//! the point where the tangent slope `s = dy/dx` satisfies `p = 1/(1 − s)`.
//! The samples are interpolated by a parametric quintic (or, failing a
//! convexity check, cubic) B-spline in cumulative chord length, the tangent index `p(t) = x′(t)/(x′(t) − y′(t))` is read off
//! the spline, and `λ(p)` is obtained by inverting `p(t)`.

use crate::error::{Error, Result};
use crate::loss::{LossFunction, Outcome};
use crate::scalar::{from_usize, lit, Scalar};

/// Sub-samples per spline interval used to check monotonicity and convexity.
const CHECK_SUBSAMPLES: usize = 32;
/// Spline degrees tried in order; the first that yields a convex curve wins.
const DEGREES: [usize; 2] = [5, 3];

/// Interpolating B-spline in one variable.
#[derive(Clone, Debug)]
struct Spline<T> {
    degree: usize,
    knots: Vec<T>,
    coefs: Vec<T>,
}

/// Solves `a · x = b` by Gaussian elimination with partial pivoting,
/// skipping structural zeros of the banded collocation matrix.
fn solve<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    for j in 0..n {
        let pivot = (j..n).max_by(|&r, &s| a[r][j].abs().partial_cmp(&a[s][j].abs()).unwrap())?;
        if a[pivot][j] == T::zero() {
            return None;
        }
        a.swap(j, pivot);
        b.swap(j, pivot);
        let cols: Vec<usize> = (j..n).filter(|&c| a[j][c] != T::zero()).collect();
        for r in j + 1..n {
            if a[r][j] == T::zero() {
                continue;
            }
            let w = a[r][j] / a[j][j];
            for &c in &cols {
                a[r][c] = a[r][c] - w * a[j][c];
            }
            b[r] = b[r] - w * b[j];
        }
    }
    let mut x = vec![T::zero(); n];
    for j in (0..n).rev() {
        let tail: T = (j + 1..n).map(|c| a[j][c] * x[c]).sum();
        x[j] = (b[j] - tail) / a[j][j];
    }
    Some(x)
}

impl<T: Scalar> Spline<T> {
    /// Interpolates `values` at `params`. Without end derivatives the
    /// not-a-knot condition is used; with them, the first derivative is
    /// prescribed at both ends.
    fn interpolate(params: &[T], values: &[T], degree: usize, end_slopes: Option<(T, T)>) -> Option<Self> {
        let n = params.len();
        let (first, last) = (params[0], params[n - 1]);
        let (start, unknowns) = match end_slopes {
            None => (degree.div_ceil(2), n),
            Some(_) => ((degree - 1) / 2, n + 2),
        };
        let count = unknowns.checked_sub(degree + 1)?;
        let interior = params.get(start..start + count)?;
        let mut knots = vec![first; degree + 1];
        knots.extend_from_slice(interior);
        knots.extend(std::iter::repeat_n(last, degree + 1));
        let mut spline = Spline { degree, knots, coefs: vec![T::zero(); unknowns] };
        let mut rows = Vec::with_capacity(unknowns);
        let mut rhs = Vec::with_capacity(unknowns);
        let mut push = |s: &Spline<T>, t: T, order: usize, v: T| {
            let (span, ders) = s.basis(t);
            let mut row = vec![T::zero(); unknowns];
            for j in 0..=degree {
                row[span - degree + j] = ders[order][j];
            }
            rows.push(row);
            rhs.push(v);
        };
        if let Some((m0, _)) = end_slopes {
            push(&spline, first, 1, m0);
        }
        for (&t, &v) in params.iter().zip(values) {
            push(&spline, t, 0, v);
        }
        if let Some((_, m1)) = end_slopes {
            push(&spline, last, 1, m1);
        }
        spline.coefs = solve(rows, rhs)?;
        Some(spline)
    }

    fn span(&self, t: T) -> usize {
        let n = self.coefs.len();
        if t >= self.knots[n] {
            return n - 1;
        }
        let (mut lo, mut hi) = (self.degree, n);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if t < self.knots[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    }

    /// Span index and the nonzero basis functions with their first two
    /// derivatives at `t`.
    fn basis(&self, t: T) -> (usize, [[T; 6]; 3]) {
        let k = self.degree;
        let span = self.span(t);
        let u = &self.knots;
        let mut ndu = [[T::zero(); 6]; 6];
        let mut left = [T::zero(); 6];
        let mut right = [T::zero(); 6];
        ndu[0][0] = T::one();
        for j in 1..=k {
            left[j] = t - u[span + 1 - j];
            right[j] = u[span + j] - t;
            let mut saved = T::zero();
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }
        let orders = k.min(2);
        let mut ders = [[T::zero(); 6]; 3];
        for j in 0..=k {
            ders[0][j] = ndu[j][k];
        }
        let mut a = [[T::zero(); 6]; 2];
        for r in 0..=k as isize {
            let (mut s1, mut s2) = (0, 1);
            a[0][0] = T::one();
            for kk in 1..=orders as isize {
                let mut d = T::zero();
                let rk = r - kk;
                let pk = k as isize - kk;
                if r >= kk {
                    a[s2][0] = a[s1][0] / ndu[(pk + 1) as usize][rk as usize];
                    d = a[s2][0] * ndu[rk as usize][pk as usize];
                }
                let j1 = if rk >= -1 { 1 } else { -rk };
                let j2 = if r - 1 <= pk { kk - 1 } else { k as isize - r };
                for j in j1..=j2 {
                    let (j, col) = (j as usize, (rk + j) as usize);
                    a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[(pk + 1) as usize][col];
                    d = d + a[s2][j] * ndu[col][pk as usize];
                }
                if r <= pk {
                    a[s2][kk as usize] = -a[s1][(kk - 1) as usize] / ndu[(pk + 1) as usize][r as usize];
                    d = d + a[s2][kk as usize] * ndu[r as usize][pk as usize];
                }
                ders[kk as usize][r as usize] = d;
                std::mem::swap(&mut s1, &mut s2);
            }
        }
        let mut factor = from_usize::<T>(k);
        for kk in 1..=orders {
            for j in 0..=k {
                ders[kk][j] = ders[kk][j] * factor;
            }
            factor = factor * from_usize::<T>(k - kk);
        }
        (span, ders)
    }

    /// Value and first two derivatives at `t`.
    fn jet(&self, t: T) -> [T; 3] {
        let (span, ders) = self.basis(t);
        let mut out = [T::zero(); 3];
        for (order, slot) in out.iter_mut().enumerate() {
            for j in 0..=self.degree {
                *slot = *slot + self.coefs[span - self.degree + j] * ders[order][j];
            }
        }
        out
    }
}

/// Interpolates one coordinate, refitting with the end slopes clamped to
/// the admissible sign if the free fit violates it.
fn fit_coordinate<T: Scalar>(params: &[T], values: &[T], degree: usize, increasing: bool) -> Option<Spline<T>> {
    let free = Spline::interpolate(params, values, degree, None)?;
    if degree.is_multiple_of(2) {
        return Some(free);
    }
    let last = params[params.len() - 1];
    let (s0, s1) = (free.jet(params[0])[1], free.jet(last)[1]);
    let admissible = |s: T| if increasing { s.max(T::zero()) } else { s.min(T::zero()) };
    if admissible(s0) == s0 && admissible(s1) == s1 {
        return Some(free);
    }
    Spline::interpolate(params, values, degree, Some((admissible(s0), admissible(s1))))
}

/// A loss function obtained by properly re-indexing a sampled curve.
#[derive(Clone, Debug)]
pub struct CurveLoss<T> {
    x: Spline<T>,
    y: Spline<T>,
    t_end: T,
    p_lo: T,
    p_hi: T,
}

impl<T: Scalar> CurveLoss<T> {
    fn index_at(&self, t: T) -> T {
        let dx = self.x.jet(t)[1];
        let dy = self.y.jet(t)[1];
        dx / (dx - dy)
    }

    pub(crate) fn domain(&self) -> (T, T) {
        (self.p_lo, self.p_hi)
    }

    /// Curve parameter whose tangent index equals `p` (clamped to the domain).
    fn parameter_for(&self, p: T) -> T {
        if p <= self.p_lo {
            return T::zero();
        }
        if p >= self.p_hi {
            return self.t_end;
        }
        let (mut lo, mut hi) = (T::zero(), self.t_end);
        for _ in 0..200 {
            let mid = (lo + hi) / lit(2.0);
            if mid == lo || mid == hi {
                break;
            }
            if self.index_at(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo + hi) / lit(2.0)
    }

    pub(crate) fn eval(&self, y: Outcome, p: T) -> T {
        let t = self.parameter_for(p);
        match y {
            Outcome::Zero => self.x.jet(t)[0],
            Outcome::One => self.y.jet(t)[0],
        }
    }

    pub(crate) fn derivative(&self, y: Outcome, order: u32, p: T) -> Option<T> {
        if p < self.p_lo || p > self.p_hi {
            return Some(T::zero());
        }
        if order == 1 {
            let t = self.parameter_for(p);
            let [_, dx, ddx] = self.x.jet(t);
            let [_, dy, ddy] = self.y.jet(t);
            let speed = dx - dy;
            let dp_dt = (dx * ddy - ddx * dy) / (speed * speed);
            let num = match y {
                Outcome::Zero => dx,
                Outcome::One => dy,
            };
            let d = num / dp_dt;
            return d.is_finite().then_some(d);
        }
        crate::diff::derivative(|q| self.eval(y, q), p, order, self.p_lo, self.p_hi)
    }
}

/// Builds a proper loss from samples `(x, y)` of a prediction curve.
///
/// The samples must have strictly increasing `x` and strictly decreasing
/// `y`. If the first sample has `x = 0` and the last has `y = 0` the
/// result satisfies `λ₀(0) = λ₁(1) = 0`; otherwise the loss is constant at
/// the end samples outside the range of tangent indices the samples cover.
pub fn reparameterize<T: Scalar>(curve: &[(T, T)]) -> Result<LossFunction<T>> {
    let n = curve.len();
    if n < 3 {
        return Err(Error::OutOfRange(format!("need at least 3 curve points, got {n}")));
    }
    for (i, w) in curve.windows(2).enumerate() {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if !(x1 > x0 && y1 < y0) || !x1.is_finite() || !y0.is_finite() {
            return Err(Error::NonMonotoneCurve { index: i + 1 });
        }
    }
    let mut knots = Vec::with_capacity(n);
    let mut t = T::zero();
    knots.push(t);
    for w in curve.windows(2) {
        let (dx, dy) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
        t = t + (dx * dx + dy * dy).sqrt();
        knots.push(t);
    }
    let xs: Vec<T> = curve.iter().map(|c| c.0).collect();
    let ys: Vec<T> = curve.iter().map(|c| c.1).collect();

    let mut degrees: Vec<usize> = DEGREES.iter().copied().filter(|&k| k < n).collect();
    if degrees.is_empty() {
        degrees.push(n - 1);
    }
    let mut failure = None;
    for degree in degrees {
        let (Some(x), Some(y)) =
            (fit_coordinate(&knots, &xs, degree, true), fit_coordinate(&knots, &ys, degree, false))
        else {
            continue;
        };
        let mut curve_loss = CurveLoss { x, y, t_end: t, p_lo: T::zero(), p_hi: T::one() };
        match check_shape(&curve_loss, &knots) {
            Ok(()) => {
                curve_loss.p_lo = curve_loss.index_at(T::zero());
                curve_loss.p_hi = curve_loss.index_at(t);
                return Ok(LossFunction::from_curve(format!("curve[{n}]"), curve_loss));
            }
            Err(e) => failure = failure.or(Some(e)),
        }
    }
    Err(failure.unwrap_or(Error::NonConvexCurve { at: 0.0 }))
}

/// Checks that the tangent index increases strictly along the curve.
fn check_shape<T: Scalar>(curve_loss: &CurveLoss<T>, knots: &[T]) -> Result<()> {
    let n = knots.len();
    let t = knots[n - 1];
    let mut prev = -T::one();
    let total = (n - 1) * CHECK_SUBSAMPLES;
    for j in 0..=total {
        let tj = if j == total {
            t
        } else {
            let i = j / CHECK_SUBSAMPLES;
            let frac = from_usize::<T>(j % CHECK_SUBSAMPLES) / from_usize::<T>(CHECK_SUBSAMPLES);
            knots[i] + frac * (knots[i + 1] - knots[i])
        };
        let dx = curve_loss.x.jet(tj)[1];
        let dy = curve_loss.y.jet(tj)[1];
        let at = tj.to_f64().unwrap_or(f64::NAN);
        if dx < T::zero() || dy > T::zero() || !(dx - dy > T::zero()) {
            return Err(Error::NonNegativeSlope { at });
        }
        let p = dx / (dx - dy);
        if !(p > prev) {
            return Err(Error::NonConvexCurve { at });
        }
        prev = p;
    }
    Ok(())
}
