//! Scalar abstraction: the numeric core is generic over the floating type.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use std::fmt::{Debug, Display, LowerExp};

/// Floating-point scalar (`f32` or `f64`) the whole numeric stack runs on.
pub trait Real:
    Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for converting an `f64` literal into the generic scalar.
#[inline]
pub fn r<R: Real>(x: f64) -> R {
    R::from_f64(x).expect("f64 -> scalar conversion")
}

/// Complex number over the generic scalar.
pub type C<R> = Complex<R>;

/// Complex constant from `f64` parts.
#[inline]
pub fn c<R: Real>(re: f64, im: f64) -> C<R> {
    Complex::new(r(re), r(im))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions_round_trip() {
        let x: f32 = r(0.25);
        assert_eq!(x, 0.25f32);
        let y: f64 = r(-3.5);
        assert_eq!(y, -3.5);
        let z: C<f64> = c(1.0, -2.0);
        assert_eq!(z, Complex::new(1.0, -2.0));
    }
}
