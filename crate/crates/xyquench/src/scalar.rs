use num_traits::{Float, FloatConst, NumAssign};
use std::fmt::{Debug, Display};
use std::iter::Sum;

pub use num_complex::Complex;

/// Floating-point scalar used throughout the crate.
pub trait Real:
    Float + FloatConst + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    fn lit(x: f64) -> Self {
        <Self as num_traits::NumCast>::from(x).expect("literal representable")
    }

    fn from_i64(n: i64) -> Self {
        <Self as num_traits::NumCast>::from(n).expect("integer representable")
    }

    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// A tolerance floor scaled to the precision of the type.
    fn tol(x: f64) -> Self {
        let floor = Self::epsilon() * Self::lit(1.0e3);
        Self::lit(x).max(floor)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub(crate) fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

pub(crate) fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

pub(crate) fn cone<T: Real>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}

/// `i^n` for integer `n`.
pub(crate) fn i_pow<T: Real>(n: i64) -> Complex<T> {
    match n.rem_euclid(4) {
        0 => cplx(T::one(), T::zero()),
        1 => cplx(T::zero(), T::one()),
        2 => cplx(-T::one(), T::zero()),
        _ => cplx(T::zero(), -T::one()),
    }
}
