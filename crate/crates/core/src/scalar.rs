//! Scalar abstraction shared by the exact and floating-point code paths.
//!
//! Everything that only needs field arithmetic (rigidity matrices, stress
//! matrices, energies, Gaussian elimination, the simplex engine) is written
//! against [`Scalar`]. Spectral work (SVD, eigenvalues, projections) is
//! float-only and lives in [`crate::linalg::dense`].

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::model::Coordinate;

pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Signed + Send + Sync + 'static
{
    /// `true` when arithmetic is exact, so zero tests need no tolerance.
    const EXACT: bool;

    fn from_f64(x: f64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self;

    /// Reads a coordinate; `None` when the coordinate has no representation
    /// in this scalar type (an irrational value on the exact path).
    fn from_coordinate(c: &Coordinate) -> Option<Self>;

    fn to_f64(&self) -> f64;

    fn from_i64(x: i64) -> Self {
        Self::from_ratio(x, 1)
    }

    /// Zero test used by pivoting and sign checks. Exact types ignore `tol`.
    fn is_negligible(&self, tol: f64) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.to_f64().abs() <= tol
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_f64(x: f64) -> Self {
        x
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_coordinate(c: &Coordinate) -> Option<Self> {
        Some(c.value())
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn from_f64(x: f64) -> Self {
        x as f32
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        (num as f64 / den as f64) as f32
    }

    fn from_coordinate(c: &Coordinate) -> Option<Self> {
        Some(c.value() as f32)
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    /// Exact binary value of `x`; non-finite input maps to zero.
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).unwrap_or_else(BigRational::zero)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_coordinate(c: &Coordinate) -> Option<Self> {
        c.exact().cloned()
    }

    fn to_f64(&self) -> f64 {
        self.to_f64_lossy()
    }
}

trait LossyF64 {
    fn to_f64_lossy(&self) -> f64;
}

impl LossyF64 for BigRational {
    fn to_f64_lossy(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            // numerator/denominator too large for a direct conversion
            let n = self.numer().to_f64().unwrap_or(f64::NAN);
            let d = self.denom().to_f64().unwrap_or(f64::NAN);
            n / d
        })
    }
}

/// Formats an exact rational as `a` or `a/b`.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
