//! Dense univariate polynomials with ascending coefficients.

use std::fmt;

use super::scalar::Scalar;
use super::NumericsError;

#[derive(Clone, PartialEq)]
pub struct ScalarPoly<F> {
    coeffs: Vec<F>,
}

impl<F: Scalar> fmt::Debug for ScalarPoly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> =
            self.coeffs.iter().enumerate().map(|(i, c)| format!("({c})x^{i}")).collect();
        write!(f, "{}", terms.join(" + "))
    }
}

impl<F: Scalar> ScalarPoly<F> {
    /// Builds a polynomial and strips exact trailing zeros.
    pub fn new(mut coeffs: Vec<F>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        ScalarPoly { coeffs }
    }

    pub fn zero() -> Self {
        ScalarPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: F) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(F::one())
    }

    /// `x - c`.
    pub fn linear_root(c: F) -> Self {
        Self::new(vec![-c, F::one()])
    }

    pub fn monomial(c: F, k: usize) -> Self {
        let mut v = vec![F::zero(); k + 1];
        v[k] = c;
        Self::new(v)
    }

    pub fn coeffs(&self) -> &[F] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> F {
        self.coeffs.get(k).cloned().unwrap_or_else(F::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> F {
        self.coeffs.last().cloned().unwrap_or_else(F::zero)
    }

    pub fn eval(&self, x: &F) -> F {
        let mut acc = F::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c.clone() * F::from_usize(i))
                .collect(),
        )
    }

    /// Coefficients of `p(x0 + t)` in powers of `t`.
    pub fn shift(&self, x0: &F) -> Self {
        let mut out: Vec<F> = self.coeffs.clone();
        let n = out.len();
        for i in 0..n {
            for j in (i..n.saturating_sub(1)).rev() {
                let t = out[j + 1].clone() * x0.clone();
                out[j] = out[j].clone() + t;
            }
        }
        Self::new(out)
    }

    /// `k`-th Taylor coefficient at `x0`, i.e. `p^{(k)}(x0)/k!`.
    pub fn taylor_coeff(&self, x0: &F, k: usize) -> F {
        let mut acc = F::zero();
        for (i, c) in self.coeffs.iter().enumerate().skip(k).rev() {
            acc = acc * x0.clone() + c.clone() * F::from_rational(&binomial(i, k));
        }
        acc
    }

    pub fn scale(&self, s: &F) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn neg(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![F::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Self::new(out)
    }

    /// Euclidean division `self = q * d + r` with `deg r < deg d`.
    pub fn div_rem(&self, d: &Self) -> Result<(Self, Self), NumericsError> {
        let Some(dd) = d.degree() else {
            return Err(NumericsError::DivisionByZero);
        };
        let lead = d.leading();
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return Ok((Self::zero(), self.clone()));
        }
        let mut q = vec![F::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = r[k + dd].clone() / lead.clone();
            for (j, dc) in d.coeffs.iter().enumerate() {
                r[k + j] = r[k + j].clone() - c.clone() * dc.clone();
            }
            r[k + dd] = F::zero();
            q[k] = c;
        }
        r.truncate(dd);
        Ok((Self::new(q), Self::new(r)))
    }

    /// Synthetic division by `x - c`; returns quotient and remainder `p(c)`.
    pub fn div_linear(&self, c: &F) -> (Self, F) {
        if self.coeffs.is_empty() {
            return (Self::zero(), F::zero());
        }
        let n = self.coeffs.len();
        let mut q = vec![F::zero(); n - 1];
        let mut acc = F::zero();
        for i in (0..n).rev() {
            acc = acc * c.clone() + self.coeffs[i].clone();
            if i > 0 {
                q[i - 1] = acc.clone();
            }
        }
        (Self::new(q), acc)
    }

    /// Multiplicity of `c` as a root (exact zero tests in exact mode).
    pub fn root_multiplicity(&self, c: &F) -> usize {
        if self.is_zero() {
            return usize::MAX;
        }
        let scale = self.coeffs.iter().fold(F::zero(), |m, x| {
            let a = x.abs_val();
            if a > m {
                a
            } else {
                m
            }
        });
        let mut k = 0;
        while k < self.coeffs.len() && self.taylor_coeff(c, k).is_negligible(&scale) {
            k += 1;
        }
        k
    }

    pub fn convert<G: Scalar>(&self, f: impl Fn(&F) -> G) -> ScalarPoly<G> {
        ScalarPoly::new(self.coeffs.iter().map(f).collect())
    }
}

/// Binomial coefficient as an exact rational.
pub fn binomial(n: usize, k: usize) -> num::BigRational {
    use num::{BigInt, BigRational, One};
    if k > n {
        return BigRational::from_integer(BigInt::from(0));
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    BigRational::from_integer(acc)
}

/// Generalized binomial coefficient `C(a, k)` for an integer `a`.
pub fn binomial_signed(a: i64, k: usize) -> num::BigRational {
    use num::{BigInt, BigRational, One};
    let mut acc = BigRational::one();
    for i in 0..k {
        acc = acc * BigRational::new(BigInt::from(a - i as i64), BigInt::from(i as i64 + 1));
    }
    acc
}

/// Truncated power series arithmetic (coefficients in ascending order).
pub mod series {
    use super::super::scalar::Scalar;
    use super::super::NumericsError;

    pub fn mul<F: Scalar>(a: &[F], b: &[F], order: usize) -> Vec<F> {
        let mut out = vec![F::zero(); order];
        for (i, x) in a.iter().enumerate().take(order) {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate().take(order - i) {
                out[i + j] = out[i + j].clone() + x.clone() * y.clone();
            }
        }
        out
    }

    /// `a / b` to `order` terms; `b[0]` must be nonzero.
    pub fn div<F: Scalar>(a: &[F], b: &[F], order: usize) -> Result<Vec<F>, NumericsError> {
        let b0 = b.first().cloned().unwrap_or_else(F::zero);
        if b0.is_zero() {
            return Err(NumericsError::DivisionByZero);
        }
        let mut out = vec![F::zero(); order];
        for k in 0..order {
            let mut acc = a.get(k).cloned().unwrap_or_else(F::zero);
            for j in 1..=k {
                if let Some(bj) = b.get(j) {
                    acc = acc - bj.clone() * out[k - j].clone();
                }
            }
            out[k] = acc / b0.clone();
        }
        Ok(out)
    }

    /// Series of `(c + t)^(-m)`.
    pub fn inverse_power<F: Scalar>(c: &F, m: usize, order: usize) -> Result<Vec<F>, NumericsError> {
        if c.is_zero() {
            return Err(NumericsError::DivisionByZero);
        }
        let inv = F::one() / c.clone();
        let mut out = Vec::with_capacity(order);
        for k in 0..order {
            let coeff = super::binomial_signed(-(m as i64), k);
            out.push(F::from_rational(&coeff) * inv.powi(m + k));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::scalar::ratio;
    use num::BigRational;

    fn p(c: &[i64]) -> ScalarPoly<BigRational> {
        ScalarPoly::new(c.iter().map(|&x| ratio(x, 1)).collect())
    }

    #[test]
    fn division_reconstructs() {
        let a = p(&[1, 2, 3, 4, 5]);
        let d = p(&[-1, 0, 2]);
        let (q, r) = a.div_rem(&d).unwrap();
        assert_eq!(q.mul(&d).add(&r), a);
        assert!(r.degree().unwrap_or(0) < 2);
    }

    #[test]
    fn shift_and_taylor_agree() {
        let a = p(&[3, -1, 0, 2]);
        let x0 = ratio(-2, 3);
        let s = a.shift(&x0);
        for k in 0..4 {
            assert_eq!(s.coeff(k), a.taylor_coeff(&x0, k));
        }
        assert_eq!(s.eval(&ratio(1, 5)), a.eval(&(x0 + ratio(1, 5))));
    }

    #[test]
    fn root_multiplicity_counts() {
        let a = p(&[1, 1]).mul(&p(&[1, 1])).mul(&p(&[0, 1]));
        assert_eq!(a.root_multiplicity(&ratio(-1, 1)), 2);
        assert_eq!(a.root_multiplicity(&ratio(0, 1)), 1);
        assert_eq!(a.root_multiplicity(&ratio(2, 1)), 0);
    }

    #[test]
    fn series_inverse_power() {
        let c = ratio(2, 1);
        let s = series::inverse_power(&c, 2, 3).unwrap();
        assert_eq!(s, vec![ratio(1, 4), ratio(-1, 4), ratio(3, 16)]);
        let back = series::mul(&s, &[ratio(4, 1), ratio(4, 1), ratio(1, 1)], 3);
        assert_eq!(back, vec![ratio(1, 1), ratio(0, 1), ratio(0, 1)]);
    }
}
