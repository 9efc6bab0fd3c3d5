use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point type the analysis is carried out in: `f32` or `f64`.
///
/// Every numeric routine in this crate is written against this trait; the
/// crate root exposes `f64` aliases for the common case.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Converts an `f64` literal into the working scalar type.
#[inline]
pub fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Converts a count into the working scalar type.
#[inline]
pub fn from_usize<T: Scalar>(n: usize) -> T {
    T::from_usize(n).expect("count representable in scalar type")
}

/// `k!` as a scalar.
pub(crate) fn factorial<T: Scalar>(k: u32) -> T {
    (1..=k).fold(T::one(), |acc, i| acc * from_usize::<T>(i as usize))
}

/// Binomial coefficient `C(n, k)` as a scalar.
pub(crate) fn binomial<T: Scalar>(n: u32, k: u32) -> T {
    let mut acc = T::one();
    for i in 0..k {
        acc = acc * from_usize::<T>((n - i) as usize) / from_usize::<T>((i + 1) as usize);
    }
    acc
}

/// `a · b` with the convention `0 · ∞ = 0`.
#[inline]
pub(crate) fn mul_zero_inf<T: Scalar>(a: T, b: T) -> T {
    if a == T::zero() || b == T::zero() {
        T::zero()
    } else {
        a * b
    }
}

/// Base-e log-sum-exp with max shift; `-∞` terms contribute nothing.
pub fn log_sum_exp<T: Scalar>(values: impl IntoIterator<Item = T> + Clone) -> T {
    let max = values.clone().into_iter().fold(T::neg_infinity(), |m, v| if v > m { v } else { m });
    if max == T::neg_infinity() {
        return T::neg_infinity();
    }
    if max == T::infinity() {
        return T::infinity();
    }
    let sum: T = values.into_iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_factorials_and_binomials() {
        assert_eq!(factorial::<f64>(0), 1.0);
        assert_eq!(factorial::<f64>(5), 120.0);
        assert_eq!(binomial::<f64>(6, 2), 15.0);
        assert_eq!(binomial::<f32>(4, 0), 1.0);
    }

    #[test]
    fn zero_times_infinity_is_zero() {
        assert_eq!(mul_zero_inf(0.0, f64::INFINITY), 0.0);
        assert_eq!(mul_zero_inf(2.0, f64::INFINITY), f64::INFINITY);
    }

    #[test]
    fn log_sum_exp_survives_large_magnitudes() {
        let v = [-1.0e6_f64, -1.0e6 - 2.0_f64.ln()];
        let direct = -1.0e6 + (1.0_f64 + 0.5).ln();
        assert!((log_sum_exp(v) - direct).abs() < 1e-9);
        assert_eq!(log_sum_exp([f64::NEG_INFINITY, f64::NEG_INFINITY]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp([f64::NEG_INFINITY, 0.0]), 0.0);
    }
}
