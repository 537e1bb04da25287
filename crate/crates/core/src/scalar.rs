//! Numeric abstractions shared by every module.
//!
//! Set-based measures and the complexity metric only need field arithmetic,
//! so they are generic over [`Scalar`], which exact rationals also satisfy.
//! Distances, clustering heights and the regression need square roots and
//! are generic over [`Real`] (`f32`/`f64`).

use std::fmt::{Debug, Display};

use num_rational::Rational64;
use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// Field-like scalar: `f32`, `f64` or an exact rational.
pub trait Scalar:
    Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Converts a non-negative count. Panics only if the count does not fit the
    /// underlying representation, which cannot happen for counts below 2^53.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar")
    }

    /// Lossy conversion used for reporting.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
impl Scalar for Rational64 {}

/// Floating-point scalar for the geometric and statistical parts.
pub trait Real: Scalar + Float {
    fn from_f64_lossy(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite f64 converts")
    }
}

impl Real for f32 {}
impl Real for f64 {}
