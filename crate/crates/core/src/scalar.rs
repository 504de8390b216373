//! Scalar abstractions shared by the algebra, synthesis and simulation code.

use std::fmt::{Debug, Display};

use num_rational::{BigRational, Rational64};
use num_traits::{Float, FromPrimitive, Num, Signed, Zero};

/// Floating-point scalar: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Coefficient ring of a [`QuasiPoly`](crate::QuasiPoly).
///
/// Floating types and exact rationals both qualify; only evaluation at a
/// complex frequency requires [`Scalar`].
pub trait Coefficient: Clone + PartialEq + Debug + Num + Signed + Send + Sync {
    /// True when the value is treated as a structural zero and dropped from
    /// the canonical coefficient map.
    fn is_negligible(&self) -> bool;
}

/// Below this magnitude a floating coefficient is a true zero (not a small one).
pub const ZERO_CUTOFF: f64 = 1e-300;

impl Coefficient for f64 {
    fn is_negligible(&self) -> bool {
        self.abs() < ZERO_CUTOFF
    }
}

impl Coefficient for f32 {
    fn is_negligible(&self) -> bool {
        // 1e-300 underflows in f32, so only exact zeros are dropped
        self.is_zero()
    }
}

impl Coefficient for Rational64 {
    fn is_negligible(&self) -> bool {
        self.is_zero()
    }
}

impl Coefficient for BigRational {
    fn is_negligible(&self) -> bool {
        self.is_zero()
    }
}

/// Distance between two finite floats in units in the last place.
pub fn ulp_distance(a: f64, b: f64) -> u64 {
    if a == b {
        return 0;
    }
    if a.is_nan() || b.is_nan() {
        return u64::MAX;
    }
    let key = |x: f64| -> i64 {
        let bits = x.to_bits() as i64;
        if bits < 0 {
            i64::MIN - bits
        } else {
            bits
        }
    };
    key(a).abs_diff(key(b))
}

/// [`ulp_distance`] for any [`Scalar`], measured in `f64` after widening.
///
/// Widening an `f32` preserves its ulp spacing ratio only approximately, so
/// for `f32` the distance is measured in the native width.
pub fn ulps<T: Scalar>(a: T, b: T) -> u64 {
    if std::mem::size_of::<T>() == 4 {
        let (a, b) = (
            a.to_f32().unwrap_or(f32::NAN),
            b.to_f32().unwrap_or(f32::NAN),
        );
        if a == b {
            return 0;
        }
        if a.is_nan() || b.is_nan() {
            return u64::MAX;
        }
        let key = |x: f32| -> i64 {
            let bits = x.to_bits() as i32;
            if bits < 0 {
                (i32::MIN - bits) as i64
            } else {
                bits as i64
            }
        };
        return key(a).abs_diff(key(b));
    }
    ulp_distance(a.as_f64(), b.as_f64())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ulp_distance_neighbours() {
        let x = 1.0_f64;
        let next = f64::from_bits(x.to_bits() + 1);
        assert_eq!(ulp_distance(x, next), 1);
        assert_eq!(ulp_distance(next, x), 1);
        assert_eq!(ulp_distance(0.0, -0.0), 0);
        assert_eq!(ulp_distance(f64::from_bits(1), -f64::from_bits(1)), 2);
    }

    #[test]
    fn ulps_f32() {
        let x = 3.0_f32;
        let next = f32::from_bits(x.to_bits() + 2);
        assert_eq!(ulps(x, next), 2);
    }

    #[test]
    fn negligible_cutoff() {
        assert!(0.0_f64.is_negligible());
        assert!(1e-301_f64.is_negligible());
        assert!(!1e-299_f64.is_negligible());
        assert!(!Rational64::new(1, 1_000_000_000).is_negligible());
    }
}
