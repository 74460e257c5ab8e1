use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating point scalar the bound and estimator math is generic over: `f32` or `f64`.
pub trait Scalar:
    'static + Send + Sync + Float + FloatConst + FromPrimitive + NumAssign + Default + Debug + Display + LowerExp
{
    /// Lossy conversion from an `f64` literal. Used for algorithm constants.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    /// Exact for small integers.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
