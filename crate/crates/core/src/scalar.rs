//! Numeric abstraction so the same dynamic programs run over `f64` or exact rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Sub};

pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    fn zero() -> Self;
    /// Exact conversion for rationals (every finite double is a dyadic rational).
    fn from_f64(x: f64) -> Self;
    fn from_u64(x: u64) -> Self;
    fn to_f64(&self) -> f64;

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }
    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn from_u64(x: u64) -> Self {
        x as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite float")
    }
    fn from_u64(x: u64) -> Self {
        BigRational::from_integer(BigInt::from(x))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}
