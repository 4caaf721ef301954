//! Scalar abstraction shared by every floating-point kernel in the crate.

use std::fmt::{Debug, Display};
use std::ops::{AddAssign, MulAssign, SubAssign};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Real scalar usable by the sums, transforms and variance functionals.
///
/// Implemented for `f32` and `f64`. Tolerances quoted in the documentation
/// assume `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FftNum
    + AddAssign
    + SubAssign
    + MulAssign
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    fn of(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 is representable")
    }

    fn of_usize(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize is representable")
    }

    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).expect("finite scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `e(x) = exp(2πi x)`, with `x` reduced modulo 1 in double precision first.
#[inline]
pub fn turn<T: Real>(x: f64) -> Complex<T> {
    let r = x - x.floor();
    let angle = T::of(r) * T::TAU();
    Complex::new(angle.cos(), angle.sin())
}

/// `e(num/den)` with the numerator reduced exactly in integers.
#[inline]
pub fn turn_rational<T: Real>(num: i64, den: u64) -> Complex<T> {
    let d = den as i64;
    let r = num.rem_euclid(d);
    turn(r as f64 / den as f64)
}

/// Distance from `x` to the nearest integer.
pub fn circle_distance(x: f64) -> f64 {
    let r = x - x.floor();
    r.min(1.0 - r)
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    carry: T,
}

impl<T: Real> CompensatedSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            carry: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum + self.carry
    }
}

impl<T: Real> FromIterator<T> for CompensatedSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of complex terms, componentwise.
#[derive(Clone, Copy, Debug, Default)]
pub struct ComplexSum<T> {
    re: CompensatedSum<T>,
    im: CompensatedSum<T>,
}

impl<T: Real> ComplexSum<T> {
    pub fn new() -> Self {
        Self {
            re: CompensatedSum::new(),
            im: CompensatedSum::new(),
        }
    }

    #[inline]
    pub fn add(&mut self, z: Complex<T>) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex<T> {
        Complex::new(self.re.value(), self.im.value())
    }
}

impl<T: Real> FromIterator<Complex<T>> for ComplexSum<T> {
    fn from_iter<I: IntoIterator<Item = Complex<T>>>(iter: I) -> Self {
        let mut acc = Self::new();
        for z in iter {
            acc.add(z);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut acc = CompensatedSum::<f64>::new();
        acc.add(1e16);
        for _ in 0..1000 {
            acc.add(1.0);
        }
        acc.add(-1e16);
        assert_eq!(acc.value(), 1000.0);
    }

    #[test]
    fn turn_is_periodic() {
        let a: Complex<f64> = turn(0.25);
        let b: Complex<f64> = turn(3.25);
        assert!((a - b).norm() < 1e-12);
        assert!((a - Complex::new(0.0, 1.0)).norm() < 1e-15);
        let c: Complex<f64> = turn_rational(-3, 4);
        assert!((c - a).norm() < 1e-15);
    }

    #[test]
    fn circle_distance_wraps() {
        assert!((circle_distance(0.9) - 0.1).abs() < 1e-15);
        assert!((circle_distance(-0.2) - 0.2).abs() < 1e-15);
        assert_eq!(circle_distance(3.0), 0.0);
    }
}
