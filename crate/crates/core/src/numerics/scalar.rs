//! Scalar abstraction shared by the exact and floating pipelines.

use std::fmt;
use std::ops::Neg;

use num::bigint::BigInt;
use num::{BigRational, One, Signed, ToPrimitive, Zero};
use num_traits::Num;

use super::quadrature;

/// Field element used throughout the crate.
///
/// Exact implementations answer `is_exact() == true` and compare with zero
/// literally; floating implementations use a relative tolerance.
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Num
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// Converts an exact rational into this scalar (rounding if inexact).
    fn from_rational(r: &BigRational) -> Self;

    /// Whether arithmetic is exact.
    fn is_exact() -> bool;

    /// Working precision in bits; `u32::MAX` for exact scalars.
    fn precision_bits() -> u32;

    /// Relative tolerance used by [`Scalar::is_negligible`]; zero when exact.
    fn tolerance() -> Self;

    /// Nearest `f64`, for reporting.
    fn to_f64(&self) -> f64;

    /// Exact rational value when one is available.
    fn to_rational(&self) -> Option<BigRational>;

    fn abs_val(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Zero test relative to `scale`. Exact scalars test `== 0`.
    fn is_negligible(&self, scale: &Self) -> bool {
        if Self::is_exact() {
            return self.is_zero();
        }
        let s = scale.abs_val();
        let s = if s < Self::one() { Self::one() } else { s };
        self.abs_val() <= Self::tolerance() * s
    }

    fn from_i64(v: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(v)))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(&BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    fn from_usize(v: usize) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(v)))
    }

    /// Square root when the scalar supports it.
    fn sqrt_opt(&self) -> Option<Self> {
        None
    }

    /// Euler gamma function when the scalar supports it.
    fn gamma_opt(&self) -> Option<Self> {
        None
    }

    /// `∫₀¹ x^α (1-x)^β (x-c)^(-order) dx` by numerical quadrature, for `c`
    /// outside `[0,1]`. Exact scalars return `None`.
    fn jacobi_quadrature(_alpha: &Self, _beta: &Self, _c: &Self, _order: u32) -> Option<Self> {
        None
    }

    /// Raises to a non-negative integer power.
    fn powi(&self, k: usize) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
}

/// Scalars with a complete set of transcendental operations.
pub trait FloatScalar: Scalar {
    fn from_f64(v: f64) -> Self;
    fn sqrt(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sinh(&self) -> Self;
    fn cosh(&self) -> Self;
    fn gamma(&self) -> Self;
    fn pi() -> Self;
    /// Machine epsilon at the working precision.
    fn epsilon() -> Self;
}

impl Scalar for BigRational {
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
    fn is_exact() -> bool {
        true
    }
    fn precision_bits() -> u32 {
        u32::MAX
    }
    fn tolerance() -> Self {
        Self::zero()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn to_rational(&self) -> Option<BigRational> {
        Some(self.clone())
    }
    fn abs_val(&self) -> Self {
        self.abs()
    }
}

impl Scalar for f64 {
    fn from_rational(r: &BigRational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }
    fn is_exact() -> bool {
        false
    }
    fn precision_bits() -> u32 {
        53
    }
    fn tolerance() -> Self {
        1e-10
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn to_rational(&self) -> Option<BigRational> {
        BigRational::from_float(*self)
    }
    fn abs_val(&self) -> Self {
        self.abs()
    }
    fn sqrt_opt(&self) -> Option<Self> {
        Some(f64::sqrt(*self))
    }
    fn gamma_opt(&self) -> Option<Self> {
        Some(FloatScalar::gamma(self))
    }
    fn jacobi_quadrature(alpha: &Self, beta: &Self, c: &Self, order: u32) -> Option<Self> {
        quadrature::jacobi_integral(alpha, beta, c, order).ok()
    }
}

impl FloatScalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sinh(&self) -> Self {
        f64::sinh(*self)
    }
    fn cosh(&self) -> Self {
        f64::cosh(*self)
    }
    fn gamma(&self) -> Self {
        let x = rug::Float::with_val(64, *self);
        x.gamma().to_f64()
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn epsilon() -> Self {
        f64::EPSILON
    }
}

/// Parses `"a/b"`, an integer, or a plain decimal string into an exact
/// rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let t = s.trim();
    if t.is_empty() {
        return None;
    }
    if let Some((n, d)) = t.split_once('/') {
        let n = BigInt::from_str_radix(n.trim(), 10).ok()?;
        let d = BigInt::from_str_radix(d.trim(), 10).ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let all = format!("{int_part}{frac_part}");
    if !all.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let n = BigInt::from_str_radix(&all, 10).ok()?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(n);
    if scale >= 0 {
        r *= BigRational::from_integer(num::pow(ten, scale as usize));
    } else {
        r /= BigRational::from_integer(num::pow(ten, (-scale) as usize));
    }
    Some(if neg { -r } else { r })
}

/// Integer part test for exact rationals.
pub fn rational_is_integer(r: &BigRational) -> bool {
    r.denom().is_one()
}

/// Shorthand for building a rational from a small fraction.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("1/2"), Some(ratio(1, 2)));
        assert_eq!(parse_rational("-3"), Some(ratio(-3, 1)));
        assert_eq!(parse_rational("0.25"), Some(ratio(1, 4)));
        assert_eq!(parse_rational("1.5e2"), Some(ratio(150, 1)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
    }

    #[test]
    fn exact_negligibility_is_literal() {
        assert!(BigRational::zero().is_negligible(&BigRational::one()));
        assert!(!ratio(1, 1_000_000_000).is_negligible(&BigRational::one()));
        assert!(1e-14_f64.is_negligible(&1.0));
    }

    #[test]
    fn powi_matches_repeated_product() {
        let x = ratio(-2, 3);
        assert_eq!(x.powi(5), ratio(-32, 243));
        assert_eq!(x.powi(0), BigRational::one());
    }
}
