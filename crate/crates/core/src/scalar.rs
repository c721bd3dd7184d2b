//! Scalar abstraction for the numeric kernels (simplex, slack matrices,
//! estimator aggregation). Exact rationals are the default everywhere; the
//! float instances exist for quick sweeps where exactness is not needed.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, Zero};

pub trait Scalar: Clone + Debug + Display + PartialOrd + Signed + FromPrimitive {
    /// Zero test used for pivoting and feasibility. Exact for rationals,
    /// tolerance-based for floats.
    fn is_negligible(&self) -> bool;

    fn is_positive_strict(&self) -> bool {
        !self.is_negligible() && self.is_positive()
    }

    fn is_negative_strict(&self) -> bool {
        !self.is_negligible() && self.is_negative()
    }

    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("integer fits scalar")
    }

    fn to_f64_lossy(&self) -> f64;
}

impl Scalar for BigRational {
    fn is_negligible(&self) -> bool {
        self.is_zero()
    }

    fn to_f64_lossy(&self) -> f64 {
        rational_to_f64(self)
    }
}

impl Scalar for f64 {
    fn is_negligible(&self) -> bool {
        self.abs() < 1e-9
    }

    fn to_f64_lossy(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn is_negligible(&self) -> bool {
        self.abs() < 1e-5
    }

    fn to_f64_lossy(&self) -> f64 {
        *self as f64
    }
}

pub fn ratio(numer: i64, denom: i64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

pub fn big_int(v: BigInt) -> BigRational {
    BigRational::from_integer(v)
}

/// Exact binary value of a finite double.
pub fn rational_from_f64(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite float")
}

pub fn rational_to_f64(v: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    v.to_f64().unwrap_or_else(|| {
        // Huge numerators: scale down before converting.
        let n = v.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = v.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Canonical `p/q` rendering used in reports.
pub fn rational_string(v: &BigRational) -> String {
    format!("{}/{}", v.numer(), v.denom())
}

/// Smallest integer `>= v`.
pub fn ceil_int(v: &BigRational) -> BigInt {
    v.ceil().to_integer()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_conversion_is_exact() {
        assert_eq!(rational_from_f64(0.375), ratio(3, 8));
        assert_eq!(rational_string(&ratio(10, 4)), "5/2");
        assert_eq!(rational_string(&int(5)), "5/1");
    }
}
