//! Scalar abstraction for the numeric core.
//!
//! Everything in this crate is written against [`Real`], so the engine works
//! with `f32` as well as `f64`. The concrete aliases at the crate root pin
//! `f64`, which is the precision all documented tolerances refer to.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum<Self>
    + Debug
    + Display
    + 'static
{
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + Sum<Self>
        + Debug
        + Display
        + 'static
{
}

/// Convert an `f64` constant into the scalar type.
#[inline]
pub fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant must convert into the scalar type")
}

/// Neumaier-compensated sum. The empirical estimators promise identities to
/// 1e-10 on samples of size 1e4, which a naive sum does not reliably deliver.
pub fn compensated_sum<T: Real, I: IntoIterator<Item = T>>(values: I) -> T {
    let mut sum = T::zero();
    let mut comp = T::zero();
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_conversion_roundtrips() {
        let x: f64 = real(0.25);
        assert_eq!(x, 0.25);
        let y: f32 = real(0.25);
        assert_eq!(y, 0.25f32);
    }

    #[test]
    fn compensated_sum_beats_naive() {
        // 1.0 followed by many tiny values that a naive f64 sum drops.
        let mut values = vec![1e-16; 10_001];
        values[0] = 1.0;
        let naive: f64 = values.iter().sum();
        let comp = compensated_sum(values.iter().copied());
        assert!((comp - (1.0 + 1e-12)).abs() < 1e-15, "comp = {comp}");
        assert!((naive - 1.0).abs() < 1e-15, "naive drops the tail: {naive}");
    }
}
