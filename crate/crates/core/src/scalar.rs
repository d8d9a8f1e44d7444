//! Scalar abstraction: the engine is generic over the real base field.
//!
//! All linear algebra runs over `Complex<R>` for a real scalar `R`; the
//! concrete instantiations are `f32` and `f64` (see the aliases at the
//! crate root). Tolerances in the spec-facing checks are stated for `f64`.

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar type the engine is generic over: `f32` or `f64`.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Default {
    /// Lossy conversion from `f64`, used for constants and JSON I/O.
    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("f64 conversion")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar over the generic real field.
pub type C<R> = Complex<R>;

/// Complex number from `f64` parts.
pub fn c<R: Real>(re: f64, im: f64) -> C<R> {
    Complex::new(R::from_f64_lossy(re), R::from_f64_lossy(im))
}

/// Complex zero.
pub fn czero<R: Real>() -> C<R> {
    Complex::new(R::zero(), R::zero())
}

/// Complex one.
pub fn cone<R: Real>() -> C<R> {
    Complex::new(R::one(), R::zero())
}

/// Modulus of a complex scalar as `f64` (for reports and thresholds).
pub fn cabs<R: Real>(z: &C<R>) -> f64 {
    let re = z.re.to_f64().unwrap_or(f64::NAN);
    let im = z.im.to_f64().unwrap_or(f64::NAN);
    re.hypot(im)
}
