//! Scalar abstraction shared by the analytic modules.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point type the analytic core is written against: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Atom counts and other integer quantities.
    fn count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `|a - b| <= rel * max(|a|, |b|)`, with exact equality accepted.
pub fn rel_close<T: Real>(a: T, b: T, rel: T) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs())
}

/// Relative deviation of `value` from `reference`.
pub fn rel_err<T: Real>(value: T, reference: T) -> T {
    if reference == T::zero() {
        value.abs()
    } else {
        ((value - reference) / reference).abs()
    }
}
