//! Scalar abstraction: every numeric kernel in this crate is generic over
//! [`Real`], implemented for `f32` and `f64`.

use ndarray::NdFloat;
use num_traits::{FromPrimitive, NumAssign};
use rand::Rng;
use rand_distr::StandardNormal;

/// Floating-point scalar used by the numeric kernels.
///
/// Besides the arithmetic bounds this adds the two random draws the crate
/// needs, so callers can stay generic without dragging distribution bounds
/// through every signature.
pub trait Real: NdFloat + FromPrimitive + NumAssign {
    /// One draw from the standard normal distribution.
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// One draw from the uniform distribution on `[lo, hi)`.
    fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: Self, hi: Self) -> Self;

    /// Lossy conversion from `f64`, for constants.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("constant representable in scalar type")
    }

    /// Lossy conversion to `f64`, for reporting.
    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).expect("scalar convertible to f64")
    }
}

impl Real for f64 {
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: Self, hi: Self) -> Self {
        rng.random_range(lo..hi)
    }
}

impl Real for f32 {
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: Self, hi: Self) -> Self {
        rng.random_range(lo..hi)
    }
}

/// Elementwise sign with the deterministic tie-break `sign(0) := +1`.
pub fn sign_pm1<S: Real>(v: S) -> S {
    if v >= S::zero() {
        S::one()
    } else {
        -S::one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_tie_break_is_plus_one() {
        assert_eq!(sign_pm1(0.0f64), 1.0);
        assert_eq!(sign_pm1(-0.0f64), 1.0);
        assert_eq!(sign_pm1(0.3f64), 1.0);
        assert_eq!(sign_pm1(-0.2f64), -1.0);
    }

    #[test]
    fn generic_draws_compile_for_both_widths() {
        let mut rng = crate::seeds::rng_from(1, &[]);
        let a: f32 = Real::uniform(&mut rng, -1.0f32, 1.0);
        let b: f64 = Real::std_normal(&mut rng);
        assert!((-1.0..1.0).contains(&a));
        assert!(b.is_finite());
    }
}
