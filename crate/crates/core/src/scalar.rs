//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All algorithms are written against [`Real`] so they run in `f32` or `f64`.
//! Tolerances quoted throughout the crate assume `f64`; in `f32` they are
//! clamped to a small multiple of the machine epsilon by [`tol`].

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, Signed};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + NumAssign
    + Signed
    + FromPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over a [`Real`] scalar.
pub type C<T> = Complex<T>;

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

/// Converts a `usize` into `T`.
#[inline]
pub fn from_usize<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("integer representable in scalar type")
}

/// A tolerance of `x`, but never below `64·ε` of the scalar type.
#[inline]
pub fn tol<T: Real>(x: f64) -> T {
    let floor = T::epsilon() * lit(64.0);
    let t = lit::<T>(x);
    if t < floor {
        floor
    } else {
        t
    }
}

#[inline]
pub fn cplx<T: Real>(re: f64, im: f64) -> C<T> {
    Complex::new(lit(re), lit(im))
}

/// The imaginary unit.
#[inline]
pub fn i_unit<T: Real>() -> C<T> {
    Complex::new(T::zero(), T::one())
}

/// Sign with `Sgn(0) = 0`.
pub fn sgn<T: Real>(x: T) -> i32 {
    if x > T::zero() {
        1
    } else if x < T::zero() {
        -1
    } else {
        0
    }
}

/// Lossy conversion to `f64`, for reporting.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
