//! Numeric abstraction for occupancy frequencies and energy accounting.

use std::fmt::{Debug, Display};

use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Scalar usable for frequencies, thresholds, power and energy.
///
/// Implemented for `f32`, `f64` and `num_rational::Ratio<i64>`; the rational
/// instantiation gives exact frequencies and watt-hours.
pub trait Scalar:
    Num + FromPrimitive + ToPrimitive + PartialOrd + Copy + Debug + Display + Send + Sync + 'static
{
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable in scalar type")
    }

    /// Lossy view for reporting.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Num + FromPrimitive + ToPrimitive + PartialOrd + Copy + Debug + Display + Send + Sync + 'static
{
}
