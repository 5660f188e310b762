//! Scalar abstraction.
//!
//! Every numeric routine in this crate is generic over [`Real`], a small
//! umbrella trait over `num_traits::Float`. Concrete pipelines instantiate it
//! as `f64` (the aliases at the crate root) or `f32`.

use num_traits::{Float, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display, LowerExp};
use std::str::FromStr;

/// Floating-point scalar type the crate is generic over (`f32` or `f64`).
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + FromStr + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + Debug
        + Display
        + LowerExp
        + FromStr
        + Send
        + Sync
        + 'static
{
}

/// Converts an `f64` constant into the working scalar type.
#[inline]
pub fn c<F: Real>(x: f64) -> F {
    F::from_f64(x).expect("constant not representable in scalar type")
}

/// Converts a `usize` count into the working scalar type.
#[inline]
pub fn cu<F: Real>(n: usize) -> F {
    F::from_usize(n).expect("count not representable in scalar type")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_convert_both_ways() {
        let x: f32 = c(0.25);
        assert_eq!(x, 0.25f32);
        let y: f64 = cu(50);
        assert_eq!(y, 50.0);
    }
}
