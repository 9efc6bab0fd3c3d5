//! Infimum / supremum of a function over an interval of predictions.
//!
//! Uniform grid scan, golden-section refinement around the best grid cell,
//! and (for open intervals) probes approaching each endpoint geometrically.

use crate::error::Result;
use crate::scalar::{from_usize, lit, Scalar};

/// Interior grid points of the scan.
pub const GRID_POINTS: usize = 4097;
/// Golden-section tolerance in `p`.
pub const REFINE_TOL: f64 = 1e-10;
/// Endpoint probes sit at distance `10^{-j}` for `j` in this range.
pub const PROBE_EXPONENTS: std::ops::RangeInclusive<i32> = 2..=12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Goal {
    Minimize,
    Maximize,
}

impl Goal {
    fn better<T: Scalar>(self, a: T, b: T) -> bool {
        match self {
            Goal::Minimize => a < b,
            Goal::Maximize => a > b,
        }
    }
}

/// Outcome of a scan: the extreme value found, where, and the endpoint
/// probes (ordered from farthest to closest to the endpoint).
#[derive(Clone, Debug, PartialEq)]
pub struct Scan<T> {
    pub value: T,
    pub at: T,
    pub near_lo: Vec<(T, T)>,
    pub near_hi: Vec<(T, T)>,
}

/// Golden-section minimization of `f` on `[a, b]`.
pub fn golden_section<T: Scalar, F>(f: F, mut a: T, mut b: T, tol: T) -> Result<(T, T)>
where
    F: Fn(T) -> Result<T>,
{
    let inv_phi: T = lit(0.618_033_988_749_894_9);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut iters = 0;
    while (b - a).abs() > tol && iters < 200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
        iters += 1;
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}

/// Scans `f` over `[lo, hi]`.
///
/// With `open = true` the endpoints themselves are never evaluated; instead
/// `f` is probed at `lo + 10^{-j}` and `hi − 10^{-j}`. With `open = false`
/// the endpoints are evaluated directly.
pub fn scan<T: Scalar, F>(f: F, lo: T, hi: T, open: bool, goal: Goal) -> Result<Scan<T>>
where
    F: Fn(T) -> Result<T>,
{
    let width = hi - lo;
    let denom = from_usize::<T>(GRID_POINTS + 1);
    let mut best_i = 1;
    let mut best = (lo + width / denom, T::nan());
    for i in 1..=GRID_POINTS {
        let p = lo + width * from_usize::<T>(i) / denom;
        let v = f(p)?;
        if best.1.is_nan() || goal.better(v, best.1) {
            best = (p, v);
            best_i = i;
        }
    }

    let a = lo + width * from_usize::<T>(best_i - 1) / denom;
    let b = lo + width * from_usize::<T>(best_i + 1) / denom;
    let signed = |p: T| -> Result<T> {
        let v = f(p)?;
        Ok(match goal {
            Goal::Minimize => v,
            Goal::Maximize => -v,
        })
    };
    let (p_ref, v_ref) = golden_section(signed, a, b, lit(REFINE_TOL))?;
    let v_ref = match goal {
        Goal::Minimize => v_ref,
        Goal::Maximize => -v_ref,
    };
    if goal.better(v_ref, best.1) {
        best = (p_ref, v_ref);
    }

    let mut near_lo = Vec::new();
    let mut near_hi = Vec::new();
    if open {
        for j in PROBE_EXPONENTS {
            let d: T = lit(10f64.powi(-j));
            if d >= width / lit(2.0) {
                continue;
            }
            near_lo.push((lo + d, f(lo + d)?));
            near_hi.push((hi - d, f(hi - d)?));
        }
    } else {
        near_lo.push((lo, f(lo)?));
        near_hi.push((hi, f(hi)?));
    }
    for &(p, v) in near_lo.iter().chain(near_hi.iter()) {
        if goal.better(v, best.1) {
            best = (p, v);
        }
    }
    Ok(Scan { value: best.1, at: best.0, near_lo, near_hi })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_finds_parabola_vertex() {
        let (x, fx) = golden_section(|x: f64| Ok((x - 0.3) * (x - 0.3) + 1.0), 0.0, 1.0, 1e-10).unwrap();
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-15);
    }

    #[test]
    fn scan_refines_between_grid_points() {
        let target = 0.123_456_789;
        let s = scan(|x: f64| Ok((x - target).powi(2)), 0.0, 1.0, true, Goal::Minimize).unwrap();
        assert!((s.at - target).abs() < 1e-8);
        assert_eq!(s.near_lo.len(), 11);
    }

    #[test]
    fn scan_picks_up_endpoint_divergence() {
        let s = scan(|x: f64| Ok(1.0 / x), 0.0, 1.0, true, Goal::Maximize).unwrap();
        assert!(s.value >= 1e12 * 0.99);
        let closed = scan(|x: f64| Ok(1.0 / x), 0.1, 0.9, false, Goal::Maximize).unwrap();
        assert!((closed.value - 10.0).abs() < 1e-12);
        assert_eq!(closed.at, 0.1);
    }
}
