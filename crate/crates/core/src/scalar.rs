//! Floating-point abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};
use rustfft::FftNum;

/// Real scalar the analysis and the simulator are generic over.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + FftNum + Default + Debug + Display + Send + Sync + 'static
{
    /// Largest exponent fed to `exp` before the overflow guard trips.
    const MAX_EXP_ARG: f64;
    /// Relative residual at which bracketing root finders stop.
    const ROOT_TOL: f64;

    /// Converts an `f64` literal. Exact for `f64`, rounded for `f32`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("representable count")
    }
}

impl Scalar for f64 {
    const MAX_EXP_ARG: f64 = 700.0;
    const ROOT_TOL: f64 = 1e-12;
}

impl Scalar for f32 {
    const MAX_EXP_ARG: f64 = 88.0;
    const ROOT_TOL: f64 = 1e-6;
}
