//! Jacobi–Piñeiro polynomials with three weights (`q = 1`, `p = 3`) and the
//! perturbation `dμ̌ R = dμ` with `R = [[0, x, 0], [0, 0, 1-x], [1, 0, 0]]`.
//!
//! Measures are normalized per weight: `dμ_a = x^{α_a}(1-x)^β dx / B(α_a+1, β+1)`.
//! Type II polynomials are unaffected; type I polynomials and Cauchy
//! transforms carry the factor `c_a = B(α_a+1, β+1)`.

use serde::Serialize;
use thiserror::Error;

use crate::geronimus::{
    christoffel_a, dw_table, existence_scan, i_matrix, tau_tilde, DwTable, GeronimusError, KbbRoute, Perturbation,
};
use crate::matpoly::{Eigenvalue, JordanChain, MatPolyError, MatrixPolynomial, SpectralData};
use crate::measures::{Component, MassParameters, MatrixOfMeasures, MeasureError, MomentGenerator, PerturbOptions};
use crate::mops::{GaussBorel, MopsError};
use crate::numerics::special::{factorial, gamma_quotient, pochhammer};
use crate::numerics::{DenseMatrix, NumericsError, Scalar, ScalarPoly};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JpError {
    #[error("not an AT system: {0}")]
    AtViolation(String),
    #[error("parameter out of range: {0}")]
    ParameterRange(String),
    #[error(transparent)]
    Geronimus(#[from] GeronimusError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Mops(#[from] MopsError),
    #[error(transparent)]
    MatPoly(#[from] MatPolyError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

type Result<T> = std::result::Result<T, JpError>;

/// `(n_1, n_2, n_3)` on the step-line.
pub fn step_line(n: usize) -> [usize; 3] {
    let (m, k) = (n / 3, n % 3);
    [0, 1, 2].map(|a| if a < k { m + 1 } else { m })
}

#[derive(Clone, Debug, PartialEq)]
pub struct JpParams<F: Scalar> {
    pub alpha: [F; 3],
    pub beta: F,
}

fn near_integer<F: Scalar>(x: &F) -> bool {
    if let Some(r) = x.to_rational() {
        if F::is_exact() {
            return r.is_integer();
        }
    }
    let v = x.to_f64();
    (v - v.round()).abs() < 1e-12
}

impl<F: Scalar> JpParams<F> {
    pub fn new(alpha: [F; 3], beta: F) -> Result<Self> {
        let minus_one = -F::one();
        if alpha.iter().any(|a| *a <= minus_one) || beta <= minus_one {
            return Err(JpError::ParameterRange("α_a and β must exceed -1".into()));
        }
        for i in 0..3 {
            for j in i + 1..3 {
                let d = alpha[i].clone() - alpha[j].clone();
                if near_integer(&d) {
                    return Err(JpError::AtViolation(format!(
                        "α_{} - α_{} = {d} is an integer",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(JpParams { alpha, beta })
    }

    /// `α = (1/2, 1/3, 1/4)`, `β = 1`.
    pub fn example() -> Self {
        Self::new([F::from_ratio(1, 2), F::from_ratio(1, 3), F::from_ratio(1, 4)], F::one()).expect("valid parameters")
    }

    fn gamma(&self, x: &F) -> Result<F> {
        gamma_quotient(x, &F::one()).map_err(|e| JpError::ParameterRange(format!("Γ({x}): {e}")))
    }

    /// `Γ(x + s) / Γ(x)` for a possibly non-integer shift `s`.
    fn poch_general(&self, x: &F, s: &F) -> Result<F> {
        gamma_quotient(&(x.clone() + s.clone()), x).map_err(|e| JpError::ParameterRange(format!("({x})_{s}: {e}")))
    }

    /// `c_a = B(α_a + 1, β + 1)`.
    pub fn normalization(&self, a: usize) -> Result<F> {
        let a1 = self.alpha[a].clone() + F::one();
        let b1 = self.beta.clone() + F::one();
        Ok(self.gamma(&b1)? / self.poch_general(&a1, &b1)?)
    }

    /// Normalized measures, one row of three components.
    pub fn measures(&self) -> Result<MatrixOfMeasures<F>> {
        let comps = self
            .alpha
            .iter()
            .map(|a| Ok(Component::from_generator(MomentGenerator::jacobi(a.clone(), self.beta.clone(), F::one())?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(MatrixOfMeasures::new(vec![comps])?)
    }

    /// Coefficients `C_n^{l_1,l_2,l_3}` of the monic type II polynomial.
    pub fn type_ii_table(&self, n: usize) -> Vec<([usize; 3], F)> {
        let nv = step_line(n);
        let [a1, a2, a3] = self.alpha.clone();
        let b = self.beta.clone();
        let one = F::one();
        let f = |k: usize| F::from_usize(k);
        let (n1, n2) = (f(nv[0]), f(nv[1]));
        let nn = f(n);
        let mut prefactor = if n % 2 == 0 { one.clone() } else { -one.clone() };
        for q in 0..3 {
            prefactor = prefactor * pochhammer(&(self.alpha[q].clone() + one.clone()), nv[q])
                / pochhammer(&(self.alpha[q].clone() + b.clone() + nn.clone() + one.clone()), nv[q]);
        }
        let mut out = Vec::new();
        for l1 in 0..=nv[0] {
            for l2 in 0..=nv[1] {
                for l3 in 0..=nv[2] {
                    let l = l1 + l2 + l3;
                    let mut c = prefactor.clone();
                    for (q, lq) in [l1, l2, l3].into_iter().enumerate() {
                        c = c * pochhammer(&-f(nv[q]), lq) / factorial::<F>(lq);
                    }
                    let s1 = a1.clone() + b.clone() + n1.clone() + one.clone();
                    let s2 = a2.clone() + b.clone() + n1.clone() + n2.clone() + one.clone();
                    c = c * pochhammer(&s1, l) / pochhammer(&(a1.clone() + one.clone()), l);
                    c = c * pochhammer(&(a1.clone() + n1.clone() + one.clone()), l2 + l3)
                        * pochhammer(&(a2.clone() + n2.clone() + one.clone()), l3)
                        / (pochhammer(&s1, l2 + l3) * pochhammer(&s2, l3));
                    c = c * pochhammer(&s2, l2 + l3) * pochhammer(&(a3.clone() + b.clone() + nn.clone() + one.clone()), l3)
                        / (pochhammer(&(a2.clone() + one.clone()), l2 + l3) * pochhammer(&(a3.clone() + one.clone()), l3));
                    out.push(([l1, l2, l3], c));
                }
            }
        }
        out
    }

    /// Monic type II polynomial `P_n`.
    pub fn type_ii(&self, n: usize) -> ScalarPoly<F> {
        let mut coeffs = vec![F::zero(); n + 1];
        for (l, c) in self.type_ii_table(n) {
            let k = l.iter().sum::<usize>();
            coeffs[k] = coeffs[k].clone() + c;
        }
        ScalarPoly::new(coeffs)
    }

    /// Coefficients `C_n^{(a),l}` for unnormalized weights, `n >= 1`
    /// (`a` is 0-based); empty when `n_a = 0`.
    pub fn type_i_coeffs(&self, n: usize, a: usize) -> Result<Vec<F>> {
        let nv = step_line(n);
        let na = nv[a];
        if na == 0 {
            return Ok(Vec::new());
        }
        let one = F::one();
        let nn = F::from_usize(n);
        let aa = self.alpha[a].clone();
        let b = self.beta.clone();
        let mut c0 = if (n - 1) % 2 == 0 { one.clone() } else { -one.clone() };
        for q in 0..3 {
            c0 = c0 * pochhammer(&(self.alpha[q].clone() + b.clone() + nn.clone()), nv[q]);
        }
        let mut den = factorial::<F>(na - 1);
        for q in (0..3).filter(|&q| q != a) {
            den = den * pochhammer(&(self.alpha[q].clone() - aa.clone()), nv[q]);
        }
        if den.is_zero() {
            return Err(JpError::AtViolation(format!("degenerate type I denominator at n = {n}")));
        }
        c0 = c0 / den;
        // Γ(α_a+β+n) / (Γ(β+n) Γ(α_a+1))
        let bn = b.clone() + nn.clone();
        c0 = c0 * self.poch_general(&(aa.clone() + one.clone()), &(bn.clone() - one.clone()))? / self.gamma(&bn)?;
        let mut out = Vec::with_capacity(na);
        for l in 0..na {
            let mut c = c0.clone() * pochhammer(&(one.clone() - F::from_usize(na)), l)
                * pochhammer(&(aa.clone() + b.clone() + nn.clone()), l)
                / (factorial::<F>(l) * pochhammer(&(aa.clone() + one.clone()), l));
            for q in (0..3).filter(|&q| q != a) {
                let d = aa.clone() - self.alpha[q].clone();
                c = c * pochhammer(&(d.clone() - F::from_usize(nv[q]) + one.clone()), l) / pochhammer(&(d + one.clone()), l);
            }
            out.push(c);
        }
        Ok(out)
    }

    /// Type I polynomials for unnormalized weights.
    pub fn type_i(&self, n: usize) -> Result<Vec<ScalarPoly<F>>> {
        (0..3).map(|a| Ok(ScalarPoly::new(self.type_i_coeffs(n, a)?))).collect()
    }

    /// Type I polynomials with the factorization's indexing and normalization:
    /// entry `a` is `c_a A^{(a)}_{m+1}`.
    pub fn type_i_normalized(&self, m: usize) -> Result<Vec<ScalarPoly<F>>> {
        (0..3)
            .map(|a| Ok(ScalarPoly::new(self.type_i_coeffs(m + 1, a)?).scale(&self.normalization(a)?)))
            .collect()
    }

    /// `(P_n(0), P_n(1))` from the closed forms.
    pub fn endpoints(&self, n: usize) -> (F, F) {
        let nv = step_line(n);
        let one = F::one();
        let nn = F::from_usize(n);
        let mut p0 = if n % 2 == 0 { one.clone() } else { -one.clone() };
        let mut p1 = pochhammer(&(self.beta.clone() + one.clone()), n);
        for (a, na) in nv.iter().enumerate() {
            let shifted = self.alpha[a].clone() + self.beta.clone() + nn.clone() + one.clone();
            p0 = p0 * pochhammer(&(self.alpha[a].clone() + one.clone()), *na) / pochhammer(&shifted, *na);
            p1 = p1 / pochhammer(&shifted, *na);
        }
        (p0, p1)
    }

    /// `P_n(0)` with the offset `α_a + β + 1`, as sometimes printed.
    pub fn endpoint_zero_unshifted(&self, n: usize) -> F {
        let nv = step_line(n);
        let one = F::one();
        let mut p0 = if n % 2 == 0 { one.clone() } else { -one.clone() };
        for (a, na) in nv.iter().enumerate() {
            p0 = p0 * pochhammer(&(self.alpha[a].clone() + one.clone()), *na)
                / pochhammer(&(self.alpha[a].clone() + self.beta.clone() + one.clone()), *na);
        }
        p0
    }

    /// Endpoint Cauchy transform for unnormalized weights.
    pub fn cauchy_endpoint(&self, n: usize, which: Endpoint) -> Result<F> {
        let one = F::one();
        match which {
            Endpoint::D2AtZero => {
                if self.alpha[1] <= F::zero() {
                    return Err(JpError::ParameterRange("D^(2)(0) needs α_2 > 0".into()));
                }
                let b1 = self.beta.clone() + one.clone();
                let mut acc = F::zero();
                for (l, c) in self.type_ii_table(n) {
                    let x = self.alpha[1].clone() + F::from_usize(l.iter().sum());
                    acc = acc + c / self.poch_general(&x, &b1)?;
                }
                Ok(-self.gamma(&b1)? * acc)
            }
            Endpoint::D3AtOne => {
                if self.beta <= F::zero() {
                    return Err(JpError::ParameterRange("D^(3)(1) needs β > 0".into()));
                }
                let mut acc = F::zero();
                for (l, c) in self.type_ii_table(n) {
                    let x = self.alpha[2].clone() + F::from_usize(l.iter().sum()) + one.clone();
                    acc = acc + c / self.poch_general(&x, &self.beta)?;
                }
                Ok(self.gamma(&self.beta)? * acc)
            }
        }
    }

    /// Endpoint Cauchy transform for the normalized weights.
    pub fn cauchy_endpoint_normalized(&self, n: usize, which: Endpoint) -> Result<F> {
        let a = match which {
            Endpoint::D2AtZero => 1,
            Endpoint::D3AtOne => 2,
        };
        Ok(self.cauchy_endpoint(n, which)? / self.normalization(a)?)
    }

    /// `d_n = [D_n^{(2)}(0) - P_n(0) ξ_0, D_n^{(3)}(1) + P_n(1) ξ_1]`, normalized weights.
    pub fn d_row(&self, n: usize, xi0: &F, xi1: &F) -> Result<[F; 2]> {
        let (p0, p1) = self.endpoints(n);
        Ok([
            self.cauchy_endpoint_normalized(n, Endpoint::D2AtZero)? - p0 * xi0.clone(),
            self.cauchy_endpoint_normalized(n, Endpoint::D3AtOne)? + p1 * xi1.clone(),
        ])
    }

    /// The same row with `- P_n(1) ξ_1` in the second entry.
    pub fn d_row_printed(&self, n: usize, xi0: &F, xi1: &F) -> Result<[F; 2]> {
        let (_, p1) = self.endpoints(n);
        let [a, b] = self.d_row(n, xi0, xi1)?;
        Ok([a, b - F::from_i64(2) * p1 * xi1.clone()])
    }

    /// `R(x) = [[0, x, 0], [0, 0, 1-x], [1, 0, 0]]`.
    pub fn perturbation_polynomial() -> MatrixPolynomial<F> {
        let z = ScalarPoly::zero;
        let entries = vec![
            vec![z(), ScalarPoly::monomial(F::one(), 1), z()],
            vec![z(), z(), ScalarPoly::new(vec![F::one(), -F::one()])],
            vec![ScalarPoly::one(), z(), z()],
        ];
        MatrixPolynomial::from_entries(&entries).expect("square entries")
    }

    /// Eigenvalues `0, 1`; right vectors `e_2, e_3`; left vectors `e_1, e_2`.
    pub fn perturbation_spectrum() -> SpectralData<F> {
        let e = |k: usize| (0..3).map(|i| if i == k { F::one() } else { F::zero() }).collect::<Vec<F>>();
        let eig = |value: F, right: usize, left: usize| Eigenvalue {
            value,
            multiplicity: 1,
            right: vec![JordanChain { vectors: vec![e(right)] }],
            left: vec![JordanChain { vectors: vec![e(left)] }],
        };
        SpectralData {
            eigenvalues: vec![eig(F::zero(), 1, 0), eig(F::one(), 2, 1)],
            det: ScalarPoly::new(vec![F::zero(), F::one(), -F::one()]),
        }
    }

    /// The perturbation with masses `ξ_0 δ(x) e_1 + ξ_1 δ(x-1) e_2`.
    pub fn perturbation(&self, xi0: F, xi1: F) -> Result<Perturbation<F>> {
        if self.alpha[1] <= F::zero() || self.beta <= F::zero() {
            return Err(JpError::ParameterRange("the perturbation needs α_2 > 0 and β > 0".into()));
        }
        Ok(Perturbation::new(
            Self::perturbation_polynomial(),
            Self::perturbation_spectrum(),
            MassParameters::scalar(vec![xi0, xi1]),
        )?)
    }

    /// `∫ B_n dμ A_m` with both families from the closed forms, `n, m < size`.
    pub fn biorthogonality(&self, size: usize) -> Result<DenseMatrix<F>> {
        let mom = self.measures()?;
        let b: Vec<ScalarPoly<F>> = (0..size).map(|n| self.type_ii(n)).collect();
        let a: Vec<Vec<ScalarPoly<F>>> = (0..size).map(|m| self.type_i_normalized(m)).collect::<Result<_>>()?;
        let mut out = DenseMatrix::zeros(size, size);
        for n in 0..size {
            for m in 0..size {
                let mut acc = F::zero();
                for (comp, am) in a[m].iter().enumerate() {
                    for (i, bi) in b[n].coeffs().iter().enumerate() {
                        for (j, aj) in am.coeffs().iter().enumerate() {
                            if !aj.is_zero() && !bi.is_zero() {
                                acc = acc + bi.clone() * aj.clone() * mom.moment(0, comp, i + j)?;
                            }
                        }
                    }
                }
                out[(n, m)] = acc;
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Endpoint {
    D2AtZero,
    D3AtOne,
}

fn det2<F: Scalar>(u: &[F; 2], v: &[F; 2]) -> F {
    u[0].clone() * v[1].clone() - u[1].clone() * v[0].clone()
}

/// `τ_n = det[d_{n-1}; d_n]`.
pub fn tau_display<F: Scalar>(d: &[[F; 2]], n: usize) -> F {
    det2(&d[n - 1], &d[n])
}

/// `P̌_n = det[[d_{n-2}, P_{n-2}], [d_{n-1}, P_{n-1}], [d_n, P_n]] / τ_{n-1}`, `n >= 2`.
pub fn type_ii_display<F: Scalar>(d: &[[F; 2]], p: &[ScalarPoly<F>], n: usize) -> Option<ScalarPoly<F>> {
    let tau = tau_display(d, n - 1);
    if tau.is_zero() {
        return None;
    }
    let c0 = det2(&d[n - 1], &d[n]);
    let c1 = -det2(&d[n - 2], &d[n]);
    let c2 = det2(&d[n - 2], &d[n - 1]);
    let s = p[n - 2].scale(&c0).add(&p[n - 1].scale(&c1)).add(&p[n].scale(&c2));
    Some(s.scale(&(F::one() / tau)))
}

/// `Ǎ_n = (1/τ_n) Σ_{i<=n-2} [x A_i^{(2)}, (1-x) A_i^{(3)}, A_i^{(1)}] det[d_i; d_{n-1}]
/// + (1/τ_n) [d_{n-1}^{(2)}, d_{n-1}^{(1)}, 0]`, `n >= 2`.
/// With `sign = -1` the sum and the second tail entry flip, as sometimes printed.
pub fn type_i_display<F: Scalar>(d: &[[F; 2]], a: &[Vec<ScalarPoly<F>>], n: usize, sign: i64) -> Option<Vec<ScalarPoly<F>>> {
    let tau = tau_display(d, n);
    if tau.is_zero() {
        return None;
    }
    let x = ScalarPoly::monomial(F::one(), 1);
    let one_minus_x = ScalarPoly::new(vec![F::one(), -F::one()]);
    let s = F::from_i64(sign);
    let mut out = vec![ScalarPoly::zero(); 3];
    for (i, ai) in a.iter().enumerate().take(n - 1) {
        let c = s.clone() * det2(&d[i], &d[n - 1]);
        let v = [x.mul(&ai[1]), one_minus_x.mul(&ai[2]), ai[0].clone()];
        for (o, vi) in out.iter_mut().zip(v) {
            *o = o.add(&vi.scale(&c));
        }
    }
    out[0] = out[0].add(&ScalarPoly::constant(d[n - 1][1].clone()));
    out[1] = out[1].add(&ScalarPoly::constant(s * d[n - 1][0].clone()));
    let inv = F::one() / tau;
    Some(out.into_iter().map(|p| p.scale(&inv)).collect())
}

/// Recurrence coefficient `T^j_{3m+k}` from the closed expression, read with
/// `α_a → α_q` inside products over `q`, `α_{a+1} → α_{k+1}`, cyclic
/// weight indices and `T^0_n = T_{n,n+1}`, `T^j_n = T_{n,n-j}`.
pub fn jp_recurrence_closed_form<F: Scalar>(params: &JpParams<F>, m: usize, k: usize, j: usize) -> Option<F> {
    let al = |i: usize| params.alpha[(i + 2) % 3].clone();
    let b = params.beta.clone();
    let fm = F::from_usize(m);
    let fk = F::from_usize(k);
    let fj = F::from_usize(j);
    let one = F::one();
    let base4 = b.clone() + F::from_i64(4) * fm.clone() + fk.clone() - fj.clone();
    let base3 = b.clone() + F::from_i64(3) * fm.clone() + fk.clone() + one.clone() - fj.clone();
    let mut num = al(k + 1) + base4.clone() + one.clone();
    let mut den = F::one();
    for q in (5 + k).saturating_sub(j)..=4 + k {
        den = den * (al(q) + base4.clone());
    }
    num = num * pochhammer(&base3, j);
    for q in 1..=3 {
        num = num * pochhammer(&(al(q) + base3.clone()), j);
    }
    for q in k + 1..=3 + k {
        den = den * pochhammer(&(al(q) + base4.clone() + one.clone()), j);
    }
    let mut sum = F::zero();
    for i in k + 1..=(4 + k).saturating_sub(j) {
        let mut t = (al(i) + fm.clone()) / pochhammer(&(al(i) + base4.clone()), j + 2);
        for q in 1..=3 {
            t = t * (al(i) - al(q) + fm.clone());
        }
        for q in (k + 1..=(4 + k).saturating_sub(j)).filter(|&q| q != i) {
            let d = al(i) - al(q);
            if d.is_zero() {
                return None;
            }
            t = t / d;
        }
        sum = sum + t;
    }
    if den.is_zero() {
        return None;
    }
    Some(num / den * sum)
}

/// One row of the demo report.
#[derive(Clone, Debug, Serialize)]
pub struct JpDemoRow {
    pub n: usize,
    pub tau: String,
    pub tau_matches_window: bool,
    pub d_matches_window: bool,
    pub type_ii_display: Option<bool>,
    pub type_i_display: Option<bool>,
    pub type_i_printed_display: Option<bool>,
    pub type_i_recurrence: Option<bool>,
    pub type_i_recurrence_residual: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct JpRecurrenceCheck {
    pub n: usize,
    pub j: usize,
    pub closed: Option<String>,
    pub factorization: String,
    pub matches: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct JpDemoReport {
    pub xi: [String; 2],
    pub n_max: usize,
    pub normalization: [String; 3],
    pub rows: Vec<JpDemoRow>,
    pub first_tau_zero: Option<usize>,
    pub oracle_singular_minor: Option<usize>,
    pub scan_consistent: bool,
    pub perturbed_biorthogonal: bool,
    pub recurrence_bandwidth: (usize, usize),
    pub recurrence_closed_form: Vec<JpRecurrenceCheck>,
}

impl JpDemoReport {
    /// Every computed path agrees with the oracle factorization.
    pub fn all_agree(&self) -> bool {
        self.scan_consistent
            && self.rows.iter().all(|r| {
                r.tau_matches_window
                    && r.d_matches_window
                    && r.type_ii_display != Some(false)
                    && r.type_i_display != Some(false)
                    && r.type_i_recurrence != Some(false)
            })
    }
}

fn poly_residual<F: Scalar>(a: &[ScalarPoly<F>], b: &[ScalarPoly<F>]) -> F {
    let mut m = F::zero();
    for (x, y) in a.iter().zip(b) {
        for c in x.sub(y).coeffs() {
            let v = c.abs_val();
            if v > m {
                m = v;
            }
        }
    }
    m
}

fn polys_agree<F: Scalar>(a: &[ScalarPoly<F>], b: &[ScalarPoly<F>]) -> bool {
    let scale = b.iter().flat_map(|p| p.coeffs().iter().map(|c| c.abs_val())).fold(F::one(), |m, v| if v > m { v } else { m });
    let r = poly_residual(a, b);
    r.is_zero() || (!F::is_exact() && r.is_negligible(&scale))
}

fn values_agree<F: Scalar>(a: &F, b: &F) -> bool {
    let d = a.clone() - b.clone();
    d.is_zero() || (!F::is_exact() && d.is_negligible(&b.abs_val()))
}

/// Perturbs the normalized measures by `R` with masses `ξ_0, ξ_1` and compares
/// the closed displays, the generic engine and the oracle factorization.
pub fn jp_demo<F: Scalar>(params: &JpParams<F>, xi0: F, xi1: F, n_max: usize) -> Result<JpDemoReport> {
    let mom = params.measures()?;
    let pert = params.perturbation(xi0.clone(), xi1.clone())?;
    let opts = PerturbOptions { allow_boundary: true };
    let perturbed = pert.apply(&mom, opts)?;
    let len = n_max + 6;
    let f = GaussBorel::factorize(&mom, len)?;
    let dw: DwTable<F> = dw_table(&f, &mom, &pert, n_max + 2)?;
    let scan = existence_scan(&mom, &pert, n_max, opts)?;
    let oracle = GaussBorel::factorize(&perturbed, scan.oracle_minor.map_or(n_max + 1, |k| k.saturating_sub(1)));
    let d: Vec<[F; 2]> = (0..=n_max + 1).map(|n| params.d_row(n, &xi0, &xi1)).collect::<Result<_>>()?;
    let d_printed: Vec<[F; 2]> = (0..=n_max + 1).map(|n| params.d_row_printed(n, &xi0, &xi1)).collect::<Result<_>>()?;
    let p: Vec<ScalarPoly<F>> = (0..=n_max + 1).map(|n| params.type_ii(n)).collect();
    let a: Vec<Vec<ScalarPoly<F>>> = (0..=n_max + 1).map(|m| params.type_i_normalized(m)).collect::<Result<_>>()?;
    let i_mat = i_matrix(&f, &perturbed, 2)?;
    let mut rows = Vec::new();
    for n in 0..=n_max {
        let window = dw.row(n);
        let d_match = values_agree(&d[n][0], &window[0]) && values_agree(&d[n][1], &window[1]);
        let (tau, tau_match) = if n >= 1 {
            let t = tau_display(&d, n);
            let m = values_agree(&t, &dw.tau(n)?);
            (t, m)
        } else {
            let t = tau_tilde(&i_mat, 0)?;
            (t.clone(), values_agree(&t, &scan.taus[0]))
        };
        let fp = oracle.as_ref().ok().filter(|fp| fp.len() > n);
        let mut row = JpDemoRow {
            n,
            tau: tau.to_string(),
            tau_matches_window: tau_match,
            d_matches_window: d_match,
            type_ii_display: None,
            type_i_display: None,
            type_i_printed_display: None,
            type_i_recurrence: None,
            type_i_recurrence_residual: None,
        };
        if let (Some(fp), true) = (fp, n >= 2) {
            row.type_ii_display = type_ii_display(&d, &p, n).map(|b| polys_agree(&[b], fp.b(n)));
            row.type_i_display = type_i_display(&d, &a, n, 1).map(|v| polys_agree(&v, fp.a(n)));
            row.type_i_printed_display = type_i_display(&d_printed, &a, n, -1).map(|v| polys_agree(&v, fp.a(n)));
            if n >= 4 {
                let x = F::from_ratio(7, 3);
                if let Ok(v) = christoffel_a(&f, &dw, &pert, n, &x, KbbRoute::Recurrence) {
                    let want = fp.a_at(n, &x);
                    let res = v.iter().zip(&want).fold(F::zero(), |m, (u, w)| {
                        let r = (u.clone() - w.clone()).abs_val();
                        if r > m {
                            r
                        } else {
                            m
                        }
                    });
                    let scale = want.iter().fold(F::one(), |m, w| if w.abs_val() > m { w.abs_val() } else { m });
                    row.type_i_recurrence = Some(res.is_zero() || (!F::is_exact() && res.is_negligible(&scale)));
                    row.type_i_recurrence_residual = Some(res.to_f64());
                }
            }
        }
        rows.push(row);
    }
    let perturbed_biorthogonal = match &oracle {
        Ok(fp) => {
            let size = fp.len().min(n_max + 1);
            let bi = fp.biorthogonality(&perturbed, size)?;
            let diff = bi.sub(&DenseMatrix::identity(bi.rows()));
            diff.is_zero() || (!F::is_exact() && diff.max_abs().is_negligible(&F::one()))
        }
        Err(_) => false,
    };
    let t = f.recurrence_matrix();
    let mut recurrence_closed_form = Vec::new();
    for n in 0..n_max.min(len - 2) {
        for j in 0..=3 {
            if j > n {
                continue;
            }
            let col = if j == 0 { n + 1 } else { n - j };
            let closed = jp_recurrence_closed_form(params, n / 3, n % 3, j);
            let fact = t.get(n, col);
            let matches = closed.as_ref().is_some_and(|c| values_agree(c, &fact));
            recurrence_closed_form.push(JpRecurrenceCheck {
                n,
                j,
                closed: closed.map(|c| c.to_string()),
                factorization: fact.to_string(),
                matches,
            });
        }
    }
    Ok(JpDemoReport {
        xi: [xi0.to_string(), xi1.to_string()],
        n_max,
        normalization: [0, 1, 2].map(|a| params.normalization(a).map(|c| c.to_string()).unwrap_or_default()),
        rows,
        first_tau_zero: scan.first_zero,
        oracle_singular_minor: scan.oracle_minor,
        scan_consistent: scan.consistent(),
        perturbed_biorthogonal,
        recurrence_bandwidth: t.bandwidth(),
        recurrence_closed_form,
    })
}
