//! Scalar abstraction shared by every statistic in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point scalar the segmenters are generic over: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, used for constants and configuration.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    /// Conversion from a count.
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Running sum carrying a compensation term (Neumaier), so that differences
/// of two prefix values stay accurate when the prefixes are large.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct CompensatedSum<T> {
    pub hi: T,
    pub lo: T,
}

impl<T: Real> CompensatedSum<T> {
    pub fn zero() -> Self {
        Self {
            hi: T::zero(),
            lo: T::zero(),
        }
    }

    pub fn add(self, x: T) -> Self {
        let s = self.hi + x;
        let err = if self.hi.abs() >= x.abs() {
            (self.hi - s) + x
        } else {
            (x - s) + self.hi
        };
        Self {
            hi: s,
            lo: self.lo + err,
        }
    }

    /// `self - other`, rounded once at the end.
    pub fn diff(self, other: Self) -> T {
        (self.hi - other.hi) + (self.lo - other.lo)
    }
}
