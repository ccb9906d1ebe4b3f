//! Generic scalar type used by every numerical module.
//!
//! All core math is written against the [`Real`] trait so the same code runs
//! in `f32` and `f64`; the concrete aliases live at the crate root. The FFT
//! backend is reached through [`FftOp`] so that the rustfft trait bounds do
//! not leak into the generic signatures.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::sync::Arc;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::{Fft, FftNum, FftPlanner};

/// One FFT of a fixed length and direction, hidden behind an object-safe
/// trait so `Real` does not need a `rustfft::FftNum` bound.
pub trait FftOp<S>: Send + Sync {
    fn process(&self, buf: &mut [Complex<S>]);
    fn len(&self) -> usize;
}

struct RustFftOp<T: FftNum>(Arc<dyn Fft<T>>);

impl<T: FftNum> FftOp<T> for RustFftOp<T> {
    fn process(&self, buf: &mut [Complex<T>]) {
        self.0.process(buf);
    }
    fn len(&self) -> usize {
        self.0.len()
    }
}

/// Forward/inverse FFT pair of a fixed length. The inverse is unnormalized
/// (rustfft convention); callers divide by the length.
#[derive(Clone)]
pub struct FftPair<S> {
    pub forward: Arc<dyn FftOp<S>>,
    pub inverse: Arc<dyn FftOp<S>>,
}

fn plan_pair<T: FftNum>(n: usize) -> FftPair<T> {
    let mut planner = FftPlanner::new();
    FftPair {
        forward: Arc::new(RustFftOp(planner.plan_fft_forward(n))),
        inverse: Arc::new(RustFftOp(planner.plan_fft_inverse(n))),
    }
}

/// Floating-point scalar with everything the solvers need: `num-traits`
/// arithmetic, constants, conversions and an FFT planner hook.
pub trait Real:
    Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    fn plan_fft(n: usize) -> FftPair<Self>;

    /// Shorthand for lossless literals in generic code.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }
}

impl Real for f64 {
    fn plan_fft(n: usize) -> FftPair<Self> {
        plan_pair(n)
    }
}

impl Real for f32 {
    fn plan_fft(n: usize) -> FftPair<Self> {
        plan_pair(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip<S: Real>() -> S {
        let n = 8;
        let pair = S::plan_fft(n);
        let mut buf: Vec<Complex<S>> = (0..n)
            .map(|i| Complex::new(S::of_usize(i), S::zero()))
            .collect();
        let orig = buf.clone();
        pair.forward.process(&mut buf);
        pair.inverse.process(&mut buf);
        let inv_n = S::one() / S::of_usize(n);
        buf.iter()
            .zip(orig.iter())
            .map(|(a, b)| (*a * inv_n - *b).norm())
            .fold(S::zero(), |m, x| if x > m { x } else { m })
    }

    #[test]
    fn fft_roundtrip_f64() {
        assert!(roundtrip::<f64>() < 1e-12);
    }

    #[test]
    fn fft_roundtrip_f32() {
        assert!(roundtrip::<f32>() < 1e-5);
    }
}
