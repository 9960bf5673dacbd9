//! Scalar abstraction shared by the jet, classification and strata code.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Machine epsilon as a plain `f64`, used when scaling tolerances.
    #[inline]
    fn eps_f64() -> f64 {
        Self::epsilon().to_f64_lossy()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex value with real scalar `T`.
pub type ComplexScalar<T> = Complex<T>;

#[inline]
pub(crate) fn cfinite<T: Real>(z: Complex<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Real inner product of two complex numbers viewed as plane vectors.
#[inline]
pub(crate) fn dot2<T: Real>(a: Complex<T>, b: Complex<T>) -> T {
    a.re * b.re + a.im * b.im
}
