//! Scalar abstraction for the simulation path.

use std::fmt::{Debug, Display};

use serde::de::DeserializeOwned;
use serde::Serialize;
use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point type the games, triggers and engine are generic over.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Debug
    + Display
    + Default
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Never fails for the IEEE types implemented here.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Infinity norm of the difference of two equal-length slices.
pub fn max_abs_diff<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&p, &q)| acc.max((p - q).abs()))
}

pub fn sq_norm<T: Scalar>(v: impl IntoIterator<Item = T>) -> T {
    v.into_iter().fold(T::zero(), |acc, e| acc + e * e)
}
