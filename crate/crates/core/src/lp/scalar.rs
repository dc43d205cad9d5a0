//! Arithmetic abstraction for the LP pipeline.
//!
//! The solver, the fractional-coring preprocessing, and the relaxed-
//! feasibility verifier all run over any [`Scalar`]. The `f64` instance
//! carries a small comparison tolerance; the `BigRational` instance is
//! exact with zero tolerance, which is what the invariant suites use.

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    /// Exact embedding of an `f64` (every finite `f64` is rational).
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    /// Comparison tolerance used by the solver's pivoting and feasibility
    /// tests. Zero for exact arithmetic.
    fn tol() -> Self;
    fn abs_val(&self) -> Self;

    fn is_zero_val(&self) -> bool {
        self.abs_val() <= Self::tol()
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn tol() -> Self {
        1e-9
    }
    fn abs_val(&self) -> Self {
        self.abs()
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn one() -> Self {
        <BigRational as One>::one()
    }
    fn from_f64(x: f64) -> Self {
        crate::exact::rat(x)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn tol() -> Self {
        <BigRational as Zero>::zero()
    }
    fn abs_val(&self) -> Self {
        Signed::abs(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_tolerance_semantics() {
        assert!(1e-10f64.is_zero_val());
        assert!(!1e-8f64.is_zero_val());
    }

    #[test]
    fn rational_is_exact() {
        let x = <BigRational as Scalar>::from_f64(0.5);
        let y = <BigRational as Scalar>::from_f64(0.25);
        assert_eq!(x + y, <BigRational as Scalar>::from_f64(0.75));
        // Exact sums differ from rounded f64 sums.
        let a = <BigRational as Scalar>::from_f64(0.1) + <BigRational as Scalar>::from_f64(0.2);
        assert_ne!(a, <BigRational as Scalar>::from_f64(0.1 + 0.2));
        assert!(!<BigRational as Scalar>::from_f64(1e-300).is_zero_val());
    }
}
