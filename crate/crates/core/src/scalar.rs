// SPDX-License-Identifier: Apache-2.0

//! Floating-point abstraction shared by the numeric modules.
//!
//! Everything that does arithmetic on features, regressions, or PCA is written
//! against [`Scalar`] so the same code runs in `f32` (fast screening) and `f64`
//! (the default for reproduction runs). Exact rationals are not supported:
//! square roots and eigen-iterations need a `Float`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only for values the type cannot hold at all.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean<T: Scalar>(xs: &[T]) -> T {
        xs.iter().copied().sum::<T>() / T::from_count(xs.len())
    }

    #[test]
    fn works_for_both_widths() {
        assert_eq!(mean(&[1.0f64, 2.0, 3.0]), 2.0);
        assert_eq!(mean(&[1.0f32, 2.0, 3.0]), 2.0);
        assert_eq!(<f32 as Scalar>::lit(0.5), 0.5f32);
    }
}
