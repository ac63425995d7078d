//! Floating point abstraction shared by every module.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar the renderer and optimizer are generic over: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Smallest positive argument accepted by `ln` before lifting.
    fn log_floor() -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn log_floor() -> Self {
        1e-300
    }
}

impl Scalar for f32 {
    #[inline]
    fn log_floor() -> Self {
        1e-37
    }
}

/// Numerically stable logistic function.
#[inline]
pub fn sigmoid<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// `ln(1 + e^x)` without overflow.
#[inline]
pub fn softplus<T: Scalar>(x: T) -> T {
    x.max(T::zero()) + (-x.abs()).exp().ln_1p()
}

/// `ln σ(x)`, exact for large negative arguments.
#[inline]
pub fn log_sigmoid<T: Scalar>(x: T) -> T {
    -softplus(-x)
}

/// `ln(e^a + e^b)` with max shift.
#[inline]
pub fn log_add_exp<T: Scalar>(a: T, b: T) -> T {
    let m = a.max(b);
    if m == T::neg_infinity() {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `sqrt(x² + ε²)`.
#[inline]
pub fn smooth_abs<T: Scalar>(x: T, eps: T) -> T {
    (x * x + eps * eps).sqrt()
}
