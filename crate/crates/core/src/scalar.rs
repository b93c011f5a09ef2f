//! Floating-point scalar abstraction.
//!
//! All numeric kernels are generic over [`Real`] so the same code runs in
//! f32 or f64. The crate-root aliases fix f64, which is what the
//! verification tolerances are calibrated for.

use num_traits::{Float, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

/// Floating-point scalar: f32 or f64.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Convert from f64 (exact for f64, rounded for f32).
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 converts to every Real")
    }

    /// Convert from usize.
    #[inline]
    fn of_usize(x: usize) -> Self {
        Self::from_usize(x).unwrap_or_else(|| Self::of(x as f64))
    }

    /// Widen to f64.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("every Real widens to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Kahan compensated accumulator.
#[derive(Debug, Clone, Copy)]
pub struct KahanSum<F> {
    sum: F,
    comp: F,
}

impl<F: Real> KahanSum<F> {
    #[inline]
    pub fn new() -> Self {
        Self {
            sum: F::zero(),
            comp: F::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: F) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> F {
        self.sum
    }
}

impl<F: Real> Default for KahanSum<F> {
    fn default() -> Self {
        Self::new()
    }
}

/// Compensated sum of a slice.
pub fn kahan_sum<F: Real>(values: &[F]) -> F {
    let mut acc = KahanSum::new();
    for &v in values {
        acc.add(v);
    }
    acc.value()
}
