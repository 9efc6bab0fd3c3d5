//! Numerical derivatives by finite differences with Richardson extrapolation.
//!
//! A derivative of order `k` is estimated from a Neville tableau of
//! difference quotients taken at geometrically shrinking steps (Ridders'
//! scheme). Central stencils are used where they fit inside the domain;
//! at or near an endpoint the stencil becomes one-sided and points inward.
//! Several starting steps are tried and the estimate with the smallest
//! relative tableau error wins, which keeps both smooth branches (where a
//! large step is best) and singular branches near an endpoint (where the
//! step must shrink with the distance to the singularity) accurate.

use crate::scalar::{binomial, lit, Scalar};

const SHRINK: f64 = 1.4;
const TABLEAU: usize = 10;
const SAFE: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Stencil {
    Central,
    Forward,
    Backward,
}

impl Stencil {
    /// Distance from `p` to the farthest stencil point, per unit step.
    fn reach(self, order: u32) -> f64 {
        match self {
            Stencil::Central => order as f64 / 2.0,
            Stencil::Forward | Stencil::Backward => order as f64,
        }
    }

    /// Ratio between successive error terms when the step shrinks by `SHRINK`.
    fn rate<T: Scalar>(self) -> T {
        match self {
            Stencil::Central => lit(SHRINK * SHRINK),
            Stencil::Forward | Stencil::Backward => lit(SHRINK),
        }
    }
}

/// Difference quotient of order `order` at `p` with step `h`.
fn quotient<T: Scalar, F: Fn(T) -> T>(f: &F, p: T, order: u32, h: T, stencil: Stencil) -> T {
    let half: T = lit(order as f64 / 2.0);
    let mut acc = T::zero();
    for i in 0..=order {
        let c: T = binomial(order, i);
        let idx = T::from_u32(i).unwrap();
        let (x, sign_even) = match stencil {
            Stencil::Central => (p + (half - idx) * h, i % 2 == 0),
            Stencil::Forward => (p + idx * h, (order - i).is_multiple_of(2)),
            Stencil::Backward => (p - idx * h, i % 2 == 0),
        };
        let term = c * f(x);
        acc = if sign_even { acc + term } else { acc - term };
    }
    acc / h.powi(order as i32)
}

/// One Ridders tableau; returns `(estimate, error)`.
fn tableau<T: Scalar, F: Fn(T) -> T>(f: &F, p: T, order: u32, h0: T, stencil: Stencil) -> Option<(T, T)> {
    let shrink: T = lit(SHRINK);
    let rate: T = stencil.rate();
    let mut a = [[T::zero(); TABLEAU]; TABLEAU];
    let mut h = h0;
    a[0][0] = quotient(f, p, order, h, stencil);
    if !a[0][0].is_finite() {
        return None;
    }
    let mut best = a[0][0];
    let mut err = T::infinity();
    for i in 1..TABLEAU {
        h = h / shrink;
        let q = quotient(f, p, order, h, stencil);
        if !q.is_finite() {
            break;
        }
        a[0][i] = q;
        let mut fac = rate;
        for j in 1..=i {
            a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - T::one());
            fac = fac * rate;
            let e = (a[j][i] - a[j - 1][i]).abs().max((a[j][i] - a[j - 1][i - 1]).abs());
            if e <= err {
                err = e;
                best = a[j][i];
            }
        }
        if (a[i][i] - a[i - 1][i - 1]).abs() >= lit::<T>(SAFE) * err {
            break;
        }
    }
    Some((best, err))
}

/// Estimates `f^{(order)}(p)` for `f` defined on `[lo, hi]`.
///
/// At `p == lo` (resp. `p == hi`) the derivative is one-sided from the
/// right (resp. left). Returns `None` when no stencil produced a finite
/// estimate.
pub fn derivative<T: Scalar, F: Fn(T) -> T>(f: F, p: T, order: u32, lo: T, hi: T) -> Option<T> {
    if order == 0 {
        let v = f(p);
        return v.is_finite().then_some(v);
    }
    let width = hi - lo;
    let below = p - lo;
    let above = hi - p;
    let dist = below.min(above);
    let k = order as f64;

    // Starting steps: the conventional step (1e-5 floor, 1% of the distance
    // to the nearest endpoint), wide and coarse steps suited to high orders
    // on smooth branches, and steps that keep a central stencil inside the
    // domain.
    let conventional = lit::<T>(1e-5).max(lit::<T>(1e-2) * dist);
    let wide = lit::<T>(0.5) * width / lit(k);
    let coarse = lit::<T>(0.1) * width / lit(k);
    let central_reach = lit::<T>(Stencil::Central.reach(order));
    let local = lit::<T>(0.9) * dist / central_reach;
    let tight = lit::<T>(0.25) * dist / central_reach;
    let inward = if below <= above { Stencil::Forward } else { Stencil::Backward };
    let room = |stencil: Stencil| match stencil {
        Stencil::Central => dist,
        Stencil::Forward => above,
        Stencil::Backward => below,
    };

    let mut best: Option<(T, T)> = None;
    for h0 in [conventional, wide, coarse, local, tight] {
        if !(h0 > T::zero()) {
            continue;
        }
        let stencil = [Stencil::Central, inward].into_iter().find(|s| lit::<T>(s.reach(order)) * h0 <= room(*s));
        let Some(stencil) = stencil else { continue };
        if let Some((est, err)) = tableau(&f, p, order, h0, stencil) {
            let err = err / est.abs().max(T::one());
            if best.is_none_or(|(_, e)| err < e) {
                best = Some((est, err));
            }
        }
    }
    best.map(|(est, _)| est)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn smooth_interior_derivatives() {
        let f = |x: f64| x.sin();
        for order in 1..=4u32 {
            let d = derivative(f, 0.3, order, 0.0, 1.0).unwrap();
            let exact = match order % 4 {
                1 => 0.3f64.cos(),
                2 => -0.3f64.sin(),
                3 => -0.3f64.cos(),
                _ => 0.3f64.sin(),
            };
            assert!(rel(d, exact) < 1e-6, "order {order}: {d} vs {exact}");
        }
    }

    #[test]
    fn one_sided_at_endpoints() {
        // -ln(1-p) is smooth on [0,1) and singular at 1.
        let f = |x: f64| -(1.0 - x).ln();
        for order in 1..=4u32 {
            let d = derivative(f, 0.0, order, 0.0, 1.0).unwrap();
            let exact = crate::scalar::factorial::<f64>(order - 1);
            assert!(rel(d, exact) < 1e-5, "order {order}: {d} vs {exact}");
        }
        let g = |x: f64| (1.0 - x) * (1.0 - x);
        let d = derivative(g, 1.0, 2, 0.0, 1.0).unwrap();
        assert!((d - 2.0).abs() < 1e-6);
        let d1 = derivative(g, 1.0, 1, 0.0, 1.0).unwrap();
        assert!(d1.abs() < 1e-7);
    }

    #[test]
    fn singular_branch_near_endpoint() {
        let f = |x: f64| -x.ln();
        let p = 1e-9;
        let d1 = derivative(f, p, 1, 0.0, 1.0).unwrap();
        let d2 = derivative(f, p, 2, 0.0, 1.0).unwrap();
        assert!(rel(d1, -1.0 / p) < 1e-6, "{d1}");
        assert!(rel(d2, 1.0 / (p * p)) < 1e-6, "{d2}");
    }

    #[test]
    fn smooth_branch_near_endpoint() {
        let f = |x: f64| (1.0 - x) * (1.0 - x);
        let p = 1e-9;
        let d2 = derivative(f, p, 2, 0.0, 1.0).unwrap();
        assert!((d2 - 2.0).abs() < 1e-6, "{d2}");
    }

    #[test]
    fn high_order_at_endpoint() {
        let f = |x: f64| x * x * x;
        let d3 = derivative(f, 0.0, 3, 0.0, 1.0).unwrap();
        assert!((d3 - 6.0).abs() < 1e-4, "{d3}");
        let d6 = derivative(|x: f64| x.exp(), 0.0, 6, 0.0, 1.0).unwrap();
        assert!((d6 - 1.0).abs() < 1e-3, "{d6}");
    }

    #[test]
    fn works_in_single_precision() {
        let d = derivative(|x: f32| x * x, 0.5f32, 1, 0.0, 1.0).unwrap();
        assert!((d - 1.0).abs() < 1e-3);
    }
}
