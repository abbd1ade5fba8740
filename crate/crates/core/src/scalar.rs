use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Numeric type a weight, activation, or membrane value can be stored in.
///
/// Implemented for every type with ring arithmetic, ordering, and a textual
/// round trip: `f32`, `f64`, and `Ratio<i64>` all qualify. The textual round
/// trip is what lets core dumps be reloaded without loss.
pub trait Scalar:
    Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Display + FromStr + Send + Sync + 'static
{
    fn from_weight(v: f32) -> Option<Self> {
        Self::from_f32(v)
    }

    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn relu(self) -> Self {
        if self < Self::zero() {
            Self::zero()
        } else {
            self
        }
    }
}

impl<T> Scalar for T where
    T: Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Display + FromStr + Send + Sync + 'static
{
}
