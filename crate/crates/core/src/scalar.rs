//! Scalar abstraction for bids, click probabilities and welfare values.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real number type the auction arithmetic runs on (`f32` or `f64`).
///
/// Random draws are always produced in `f64` and converted, so a realization
/// sampled for an `f32` model and an `f64` model with the same seed only
/// differ where the CTR itself rounds differently.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64`; every supported type can represent it approximately.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("scalar conversion from f64")
    }

    /// Conversion to `f64` for reporting and sampling.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar conversion to f64")
    }

    /// Conversion from a count.
    fn of_count(n: u64) -> Self {
        Self::from_u64(n).expect("scalar conversion from u64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
