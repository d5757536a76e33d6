//! Numeric field used by the jet recursions: `f64`, or exact rationals for
//! round-trip checks.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    /// Exact conversion of a finite binary64 value.
    fn from_f64(v: f64) -> Self;
    fn from_i64(v: i64) -> Self;
    fn to_f64(&self) -> f64;
    fn is_zero(&self) -> bool;

    fn mul_ref(&self, other: &Self) -> Self {
        self.clone() * other.clone()
    }

    fn add_assign_ref(&mut self, other: &Self) {
        *self = self.clone() + other.clone();
    }

    fn abs_f64(&self) -> f64 {
        self.to_f64().abs()
    }

    /// `sum w * x * y` over the triples.
    fn dot3<'a>(terms: impl Iterator<Item = (&'a Self, &'a Self, &'a Self)>) -> Self {
        let mut acc = Self::zero();
        for (w, x, y) in terms {
            acc.add_assign_ref(&w.mul_ref(&x.mul_ref(y)));
        }
        acc
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self += *other;
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).expect("finite value")
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from_i64(v).unwrap())
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self += other;
    }
    fn abs_f64(&self) -> f64 {
        Scalar::to_f64(&self.abs())
    }

    // Unreduced accumulation over a running common denominator; one reduction at the end.
    fn dot3<'a>(terms: impl Iterator<Item = (&'a Self, &'a Self, &'a Self)>) -> Self {
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        for (w, x, y) in terms {
            let n = w.numer() * x.numer() * y.numer();
            let d = w.denom() * x.denom() * y.denom();
            if d == den {
                num += n;
                continue;
            }
            let g = num_integer::Integer::gcd(&den, &d);
            let (dg, eg) = (&d / &g, &den / &g);
            num = num * &dg + n * eg;
            den *= dg;
        }
        BigRational::new(num, den)
    }
}

/// `m / 10^6` as an exact rational.
pub fn micro_rational(m: i64) -> BigRational {
    BigRational::new(BigInt::from(m), BigInt::from(1_000_000))
}
