//! Rising factorials and gamma ratios that stay exact.

use super::scalar::Scalar;
use super::NumericsError;

/// Rising factorial `(x)_k = x (x+1) ... (x+k-1)`.
pub fn pochhammer<F: Scalar>(x: &F, k: usize) -> F {
    let mut acc = F::one();
    let mut t = x.clone();
    for _ in 0..k {
        acc = acc * t.clone();
        t = t + F::one();
    }
    acc
}

/// `Γ(x+k)/Γ(x)` for any integer `k`: `(x)_k` when `k >= 0`, otherwise
/// `1/(x+k)_{-k}`.
pub fn gamma_ratio<F: Scalar>(x: &F, k: i64) -> Result<F, NumericsError> {
    if k >= 0 {
        return Ok(pochhammer(x, k as usize));
    }
    let base = x.clone() + F::from_i64(k);
    let d = pochhammer(&base, (-k) as usize);
    if d.is_zero() {
        return Err(NumericsError::DivisionByZero);
    }
    Ok(F::one() / d)
}

/// `Γ(x)/Γ(y)`: exact when `x - y` is an integer, otherwise through the
/// scalar's gamma function when it has one.
pub fn gamma_quotient<F: Scalar>(x: &F, y: &F) -> Result<F, NumericsError> {
    let diff = x.clone() - y.clone();
    if let Some(r) = diff.to_rational() {
        if r.is_integer() && (F::is_exact() || r.numer().bits() < 32) {
            let k: i64 = r.to_integer().try_into().map_err(|_| NumericsError::Domain("gamma shift too large".into()))?;
            return gamma_ratio(y, k);
        }
    }
    match (x.gamma_opt(), y.gamma_opt()) {
        (Some(a), Some(b)) => Ok(a / b),
        _ => Err(NumericsError::NeedsFloat("gamma of a non-integer shift".into())),
    }
}

/// `k!` in the scalar type.
pub fn factorial<F: Scalar>(k: usize) -> F {
    pochhammer(&F::one(), k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::scalar::ratio;
    use num::BigRational;

    #[test]
    fn pochhammer_values() {
        assert_eq!(pochhammer(&ratio(1, 2), 3), ratio(15, 8));
        assert_eq!(pochhammer(&ratio(-2, 1), 3), ratio(0, 1));
        assert_eq!(factorial::<BigRational>(5), ratio(120, 1));
    }

    #[test]
    fn gamma_ratio_negative_shift() {
        let x = ratio(7, 2);
        assert_eq!(gamma_ratio(&x, -2).unwrap(), ratio(4, 15));
        assert_eq!(gamma_ratio(&x, 2).unwrap() * gamma_ratio(&(x.clone() + ratio(2, 1)), -2).unwrap(), ratio(1, 1));
    }

    #[test]
    fn gamma_quotient_exact_and_float() {
        assert_eq!(gamma_quotient(&ratio(9, 2), &ratio(5, 2)).unwrap(), ratio(35, 4));
        assert!(gamma_quotient(&ratio(1, 2), &ratio(1, 3)).is_err());
        let f = gamma_quotient(&0.5_f64, &1.0).unwrap();
        assert!((f - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }
}
