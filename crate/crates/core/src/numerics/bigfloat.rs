//! Fixed-precision binary floating point backed by MPFR.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use num::bigint::{BigInt, Sign};
use num::BigRational;
use num_traits::{Num, One, Zero};
use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use super::quadrature;
use super::scalar::{FloatScalar, Scalar};

/// Floating point number with `P` bits of mantissa.
///
/// The precision is part of the type, so values of different precisions
/// cannot be mixed by accident.
#[derive(Clone)]
pub struct BigFloat<const P: u32>(Float);

impl<const P: u32> BigFloat<P> {
    pub fn new(value: Float) -> Self {
        if value.prec() == P {
            BigFloat(value)
        } else {
            BigFloat(Float::with_val(P, value))
        }
    }

    pub fn inner(&self) -> &Float {
        &self.0
    }

    pub fn into_inner(self) -> Float {
        self.0
    }

    fn lift(v: f64) -> Self {
        BigFloat(Float::with_val(P, v))
    }
}

fn to_rug_integer(v: &BigInt) -> Integer {
    let (sign, digits) = v.to_u32_digits();
    let mut out = Integer::from_digits(&digits, rug::integer::Order::Lsf);
    if sign == Sign::Minus {
        out = -out;
    }
    out
}

fn from_rug_integer(v: &Integer) -> BigInt {
    let digits: Vec<u32> = v.to_digits(rug::integer::Order::Lsf);
    let sign = match v.cmp0() {
        Ordering::Less => Sign::Minus,
        Ordering::Equal => Sign::NoSign,
        Ordering::Greater => Sign::Plus,
    };
    BigInt::from_slice(sign, &digits)
}

/// Converts an exact rational into an MPFR rational.
pub fn to_rug_rational(r: &BigRational) -> Rational {
    Rational::from((to_rug_integer(r.numer()), to_rug_integer(r.denom())))
}

impl<const P: u32> fmt::Debug for BigFloat<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.to_string_radix(10, Some(20)))
    }
}

impl<const P: u32> fmt::Display for BigFloat<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = (P as f64 * std::f64::consts::LOG10_2).ceil() as usize;
        write!(f, "{}", self.0.to_string_radix(10, Some(digits.max(1))))
    }
}

impl<const P: u32> PartialEq for BigFloat<P> {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl<const P: u32> PartialOrd for BigFloat<P> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl<const P: u32> $tr for BigFloat<P> {
            type Output = Self;
            fn $m(self, rhs: Self) -> Self {
                BigFloat(self.0 $op rhs.0)
            }
        }
    };
}
binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
binop!(Div, div, /);

impl<const P: u32> Rem for BigFloat<P> {
    type Output = Self;
    fn rem(self, rhs: Self) -> Self {
        let q = Float::with_val(P, &self.0 / &rhs.0).trunc();
        BigFloat(self.0 - q * rhs.0)
    }
}

impl<const P: u32> Neg for BigFloat<P> {
    type Output = Self;
    fn neg(self) -> Self {
        BigFloat(-self.0)
    }
}

impl<const P: u32> Zero for BigFloat<P> {
    fn zero() -> Self {
        BigFloat(Float::new(P))
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl<const P: u32> One for BigFloat<P> {
    fn one() -> Self {
        BigFloat(Float::with_val(P, 1))
    }
}

impl<const P: u32> Num for BigFloat<P> {
    type FromStrRadixErr = rug::float::ParseFloatError;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        let parsed = Float::parse_radix(s, radix as i32)?;
        Ok(BigFloat(Float::with_val(P, parsed)))
    }
}

impl<const P: u32> Scalar for BigFloat<P> {
    fn from_rational(r: &BigRational) -> Self {
        BigFloat(Float::with_val(P, &to_rug_rational(r)))
    }
    fn is_exact() -> bool {
        false
    }
    fn precision_bits() -> u32 {
        P
    }
    fn tolerance() -> Self {
        let bits = (P - P / 8) as i32;
        BigFloat(Float::with_val(P, 2).pow(-bits))
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }
    fn to_rational(&self) -> Option<BigRational> {
        let r = self.0.to_rational()?;
        let (n, d) = r.into_numer_denom();
        Some(BigRational::new(from_rug_integer(&n), from_rug_integer(&d)))
    }
    fn abs_val(&self) -> Self {
        BigFloat(self.0.clone().abs())
    }
    fn sqrt_opt(&self) -> Option<Self> {
        Some(FloatScalar::sqrt(self))
    }
    fn gamma_opt(&self) -> Option<Self> {
        Some(FloatScalar::gamma(self))
    }
    fn jacobi_quadrature(alpha: &Self, beta: &Self, c: &Self, order: u32) -> Option<Self> {
        quadrature::jacobi_integral(alpha, beta, c, order).ok()
    }
}

impl<const P: u32> FloatScalar for BigFloat<P> {
    fn from_f64(v: f64) -> Self {
        Self::lift(v)
    }
    fn sqrt(&self) -> Self {
        BigFloat(self.0.clone().sqrt())
    }
    fn exp(&self) -> Self {
        BigFloat(self.0.clone().exp())
    }
    fn ln(&self) -> Self {
        BigFloat(self.0.clone().ln())
    }
    fn sinh(&self) -> Self {
        BigFloat(self.0.clone().sinh())
    }
    fn cosh(&self) -> Self {
        BigFloat(self.0.clone().cosh())
    }
    fn gamma(&self) -> Self {
        BigFloat(self.0.clone().gamma())
    }
    fn pi() -> Self {
        BigFloat(Float::with_val(P, Constant::Pi))
    }
    fn epsilon() -> Self {
        BigFloat(Float::with_val(P, 2).pow(1 - P as i32))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::scalar::ratio;

    type F256 = BigFloat<256>;

    #[test]
    fn rational_roundtrip_is_exact_for_dyadics() {
        let r = ratio(3, 8);
        let f = F256::from_rational(&r);
        assert_eq!(f.to_rational(), Some(r));
    }

    #[test]
    fn third_is_accurate_to_working_precision() {
        let f = F256::from_rational(&ratio(1, 3));
        let back = f.clone() * F256::from_i64(3) - F256::one();
        assert!(back.abs_val() < F256::epsilon() * F256::from_i64(4));
    }

    #[test]
    fn gamma_half_is_sqrt_pi() {
        let half = F256::from_ratio(1, 2);
        let diff = half.gamma() - F256::pi().sqrt();
        assert!(diff.abs_val() < F256::epsilon() * F256::from_i64(16));
    }

    #[test]
    fn remainder_truncates_toward_zero() {
        let a = F256::from_ratio(7, 2);
        let b = F256::from_i64(2);
        assert_eq!(a % b, F256::from_ratio(3, 2));
    }
}
