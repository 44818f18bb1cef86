//! Floating-point scalar abstraction for the model math.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::{de::DeserializeOwned, Serialize};

/// Scalar type the feature, tree, TF-IDF and SVM math is generic over.
///
/// Implemented for `f32` and `f64`. Counts convert losslessly for every
/// corpus size this crate targets (`f64` is exact below 2^53).
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Copy
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Lossy conversion from `f64` literals and intermediate values.
    fn of(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("finite f64 converts to any float scalar")
    }

    /// Conversion from a count.
    fn from_count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize converts to any float scalar")
    }

    /// `100 * num / den`, or zero when the denominator is zero.
    fn pct(num: usize, den: usize) -> Self {
        if den == 0 {
            Self::zero()
        } else {
            Self::from_count(num) * Self::of(100.0) / Self::from_count(den)
        }
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
