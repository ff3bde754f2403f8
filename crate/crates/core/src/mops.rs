//! Gauss–Borel factorization of the moment matrix and the type I/II families.

use thiserror::Error;

use crate::measures::{MatrixOfMeasures, MeasureError};
use crate::numerics::{DenseMatrix, NumericsError, Scalar, ScalarPoly};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MopsError {
    /// The pivot with this 0-based index vanishes: orthogonality stops there.
    #[error("leading principal minor {0} is singular")]
    SingularMinor(usize),
    #[error("index {index} needs {needed} rows, factorization has {available}")]
    SlackExceeded { index: usize, needed: usize, available: usize },
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// `𝓜 = S⁻¹ H S̄⁻ᵀ` on a scalar-indexed truncation, with
/// `B = S X_[q]` and `A = X_[p]ᵀ S̄ᵀ H⁻¹`.
#[derive(Clone, Debug)]
pub struct GaussBorel<F: Scalar> {
    p: usize,
    q: usize,
    s: DenseMatrix<F>,
    s_inv: DenseMatrix<F>,
    h: Vec<F>,
    sbar: DenseMatrix<F>,
    a: Vec<Vec<ScalarPoly<F>>>,
    b: Vec<Vec<ScalarPoly<F>>>,
}

impl<F: Scalar> GaussBorel<F> {
    /// Factorizes the leading `(n_max + 1)`-square scalar truncation.
    pub fn factorize(mom: &MatrixOfMeasures<F>, n_max: usize) -> Result<Self, MopsError> {
        let dim = n_max + 1;
        let m = mom.scalar_moment_matrix(dim, dim)?;
        Self::from_moment_matrix(&m, mom.p(), mom.q())
    }

    pub fn from_moment_matrix(m: &DenseMatrix<F>, p: usize, q: usize) -> Result<Self, MopsError> {
        let lu = m.lu_no_pivot().map_err(|e| match e {
            NumericsError::SingularMinor { index } => MopsError::SingularMinor(index),
            other => MopsError::Numerics(other),
        })?;
        let dim = m.rows();
        let h: Vec<F> = (0..dim).map(|i| lu.u[(i, i)].clone()).collect();
        let ubar = DenseMatrix::from_fn(dim, dim, |i, j| lu.u[(i, j)].clone() / h[i].clone());
        let s = lu.l.inverse_lower()?;
        let sbar = ubar.inverse_upper()?.transpose();
        let b = (0..dim)
            .map(|n| {
                (0..q)
                    .map(|c| ScalarPoly::new((c..=n).step_by(q).map(|i| s[(n, i)].clone()).collect()))
                    .collect()
            })
            .collect();
        let a = (0..dim)
            .map(|n| {
                (0..p)
                    .map(|c| {
                        ScalarPoly::new((c..=n).step_by(p).map(|j| sbar[(n, j)].clone() / h[n].clone()).collect())
                    })
                    .collect()
            })
            .collect();
        Ok(GaussBorel { p, q, s, s_inv: lu.l, h, sbar, a, b })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Number of scalar indices covered (`n_max + 1`).
    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn s(&self) -> &DenseMatrix<F> {
        &self.s
    }

    pub fn s_inverse(&self) -> &DenseMatrix<F> {
        &self.s_inv
    }

    pub fn sbar(&self) -> &DenseMatrix<F> {
        &self.sbar
    }

    pub fn h(&self) -> &[F] {
        &self.h
    }

    /// `B_n = (B_n^{(1)}, ..., B_n^{(q)})`.
    pub fn b(&self, n: usize) -> &[ScalarPoly<F>] {
        &self.b[n]
    }

    /// `A_n = (A_n^{(1)}, ..., A_n^{(p)})`.
    pub fn a(&self, n: usize) -> &[ScalarPoly<F>] {
        &self.a[n]
    }

    pub fn b_at(&self, n: usize, x: &F) -> Vec<F> {
        self.b[n].iter().map(|c| c.eval(x)).collect()
    }

    pub fn a_at(&self, n: usize, x: &F) -> Vec<F> {
        self.a[n].iter().map(|c| c.eval(x)).collect()
    }

    /// `B_n` for `0 <= n < len`, zero outside.
    pub fn b_or_zero(&self, n: isize, x: &F) -> Vec<F> {
        if n < 0 {
            return vec![F::zero(); self.q];
        }
        self.b_at(n as usize, x)
    }

    pub fn a_or_zero(&self, n: isize, x: &F) -> Vec<F> {
        if n < 0 {
            return vec![F::zero(); self.p];
        }
        self.a_at(n as usize, x)
    }

    fn check_index(&self, index: usize, needed: usize) -> Result<(), MopsError> {
        if needed > self.len() {
            return Err(MopsError::SlackExceeded { index, needed, available: self.len() });
        }
        Ok(())
    }

    /// `T = S Λ_[q] S⁻¹`, valid on rows `n <= len - 1 - q`.
    pub fn recurrence_matrix(&self) -> RecurrenceMatrix<F> {
        let dim = self.len();
        let rows = dim.saturating_sub(self.q);
        let t = DenseMatrix::from_fn(rows, dim, |n, m| {
            let mut acc = F::zero();
            for k in 0..=n {
                let e = &self.s_inv[(k + self.q, m)];
                if !e.is_zero() {
                    acc = acc + self.s[(n, k)].clone() * e.clone();
                }
            }
            acc
        });
        RecurrenceMatrix { t, p: self.p, q: self.q }
    }

    /// `T = 𝒰⁻¹ Λ_[p]ᵀ 𝒰` with `𝒰⁻¹ = S̄ᵀ H⁻¹`, valid on columns
    /// `m <= len - 1 - p`.
    pub fn recurrence_matrix_dual(&self) -> RecurrenceMatrix<F> {
        let dim = self.len();
        let cols = dim.saturating_sub(self.p);
        let u = DenseMatrix::from_fn(dim, dim, |i, j| self.sbar[(j, i)].clone() / self.h[j].clone());
        let u_inv = u.inverse_upper().expect("unitriangular times diagonal");
        let t = DenseMatrix::from_fn(dim, cols, |n, m| {
            let mut acc = F::zero();
            for k in 0..=m {
                if k + self.p >= dim {
                    break;
                }
                let e = &u_inv[(n, k + self.p)];
                if !e.is_zero() {
                    acc = acc + e.clone() * u[(k, m)].clone();
                }
            }
            acc
        });
        RecurrenceMatrix { t, p: self.p, q: self.q }
    }

    /// `∫ B_n dμ A_m` by contracting coefficients against moments.
    pub fn biorthogonality(&self, mom: &MatrixOfMeasures<F>, limit: usize) -> Result<DenseMatrix<F>, MopsError> {
        self.check_index(limit, limit + 1)?;
        let mut out = DenseMatrix::zeros(limit + 1, limit + 1);
        for n in 0..=limit {
            for m in 0..=limit {
                let mut acc = F::zero();
                for (bi, bp) in self.b[n].iter().enumerate() {
                    for (ai, ap) in self.a[m].iter().enumerate() {
                        acc = acc + pair(bp, ap, |k| mom.moment(bi, ai, k))?;
                    }
                }
                out[(n, m)] = acc;
            }
        }
        Ok(out)
    }

    /// Checks `∫ B_n dμ_{·,a} x^l = 0` for `l p + a < n` and
    /// `∫ x^l dμ_{b,·} A_n = 0` for `l q + b < n` (0-based components),
    /// and that the first index past each range is nonzero whenever it is the
    /// diagonal entry.
    pub fn diagonal_orthogonality(&self, mom: &MatrixOfMeasures<F>, limit: usize) -> Result<OrthogonalityReport, MopsError> {
        self.check_index(limit, limit + 1)?;
        let mut report = OrthogonalityReport::default();
        for n in 0..=limit {
            for a in 0..self.p {
                let mut l = 0;
                while l * self.p + a <= n {
                    let mono = ScalarPoly::monomial(F::one(), l);
                    let mut acc = F::zero();
                    for (b, bp) in self.b[n].iter().enumerate() {
                        acc = acc + pair(bp, &mono, |k| mom.moment(b, a, k))?;
                    }
                    record(&mut report, n, l * self.p + a, &acc, &self.h[n], "type II");
                    l += 1;
                }
            }
            for b in 0..self.q {
                let mut l = 0;
                while l * self.q + b <= n {
                    let mono = ScalarPoly::monomial(F::one(), l);
                    let mut acc = F::zero();
                    for (a, ap) in self.a[n].iter().enumerate() {
                        acc = acc + pair(&mono, ap, |k| mom.moment(b, a, k))?;
                    }
                    record(&mut report, n, l * self.q + b, &acc, &F::one(), "type I");
                    l += 1;
                }
            }
        }
        Ok(report)
    }

    /// Step-line degree pattern: `B_n^{(b)}` has degree at most
    /// `⌊(n-b)/q⌋`, with a unit coefficient there for `b = n mod q`; the same
    /// for `A_n^{(a)}` with `p` and leading coefficient `1/H_n`.
    pub fn degree_structure(&self) -> DegreeReport {
        let mut report = DegreeReport::default();
        for n in 0..self.len() {
            for (c, poly) in self.b[n].iter().enumerate() {
                check_degree(&mut report, "B", n, c, self.q, poly, &F::one());
            }
            let inv_h = F::one() / self.h[n].clone();
            for (c, poly) in self.a[n].iter().enumerate() {
                check_degree(&mut report, "A", n, c, self.p, poly, &inv_h);
            }
        }
        report
    }

    /// Residuals of `T B(x) = x B(x)` and `A(x) T = x A(x)` on interior
    /// indices at `x`.
    pub fn recurrence_residual(&self, t: &RecurrenceMatrix<F>, x: &F) -> F {
        let mut worst = F::zero();
        let dim = self.len();
        let bump = |w: &mut F, v: F| {
            let a = v.abs_val();
            if a > *w {
                *w = a;
            }
        };
        for n in 0..t.t.rows() {
            if n + self.q >= dim {
                break;
            }
            for c in 0..self.q {
                let mut acc = -x.clone() * self.b[n][c].eval(x);
                for m in 0..=n + self.q {
                    acc = acc + t.get(n, m) * self.b[m][c].eval(x);
                }
                bump(&mut worst, acc);
            }
        }
        for m in 0..t.t.cols() {
            if m + self.p >= dim || m + self.p >= t.t.rows() {
                break;
            }
            for c in 0..self.p {
                let mut acc = -x.clone() * self.a[m][c].eval(x);
                for n in 0..=m + self.p {
                    acc = acc + self.a[n][c].eval(x) * t.get(n, m);
                }
                bump(&mut worst, acc);
            }
        }
        worst
    }
}

fn pair<F: Scalar>(
    left: &ScalarPoly<F>,
    right: &ScalarPoly<F>,
    moment: impl Fn(usize) -> Result<F, MeasureError>,
) -> Result<F, MopsError> {
    let mut acc = F::zero();
    for (i, x) in left.coeffs().iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in right.coeffs().iter().enumerate() {
            if !y.is_zero() {
                acc = acc + x.clone() * y.clone() * moment(i + j)?;
            }
        }
    }
    Ok(acc)
}

fn record<F: Scalar>(report: &mut OrthogonalityReport, n: usize, col: usize, value: &F, diag: &F, family: &str) {
    if col < n {
        report.checked += 1;
        if !value.is_negligible(diag) {
            report.violations.push(format!("{family} n={n} column {col}: {value}"));
        }
    } else if col == n {
        report.checked += 1;
        if (value.clone() - diag.clone()).is_negligible(diag) {
            return;
        }
        report.violations.push(format!("{family} n={n} diagonal: {value}"));
    }
}

fn check_degree<F: Scalar>(
    report: &mut DegreeReport,
    family: &str,
    n: usize,
    c: usize,
    period: usize,
    poly: &ScalarPoly<F>,
    lead: &F,
) {
    report.checked += 1;
    let bound = if c <= n { Some((n - c) / period) } else { None };
    match (poly.degree(), bound) {
        (None, _) => {}
        (Some(d), Some(b)) if d <= b => {}
        (Some(d), _) => report.violations.push(format!("{family}_{n}^({c}) has degree {d}")),
    }
    if c == n % period {
        let top = poly.coeff(n / period);
        if !(top.clone() - lead.clone()).is_negligible(lead) {
            report.violations.push(format!("{family}_{n}^({c}) leading coefficient {top}"));
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OrthogonalityReport {
    pub checked: usize,
    pub violations: Vec<String>,
}

impl OrthogonalityReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DegreeReport {
    pub checked: usize,
    pub violations: Vec<String>,
}

impl DegreeReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Banded recurrence matrix, `p` subdiagonals and `q` superdiagonals.
#[derive(Clone, Debug)]
pub struct RecurrenceMatrix<F: Scalar> {
    pub t: DenseMatrix<F>,
    pub p: usize,
    pub q: usize,
}

impl<F: Scalar> RecurrenceMatrix<F> {
    /// Entry `(n, m)`, zero outside the computed window.
    pub fn get(&self, n: usize, m: usize) -> F {
        if n < self.t.rows() && m < self.t.cols() {
            self.t[(n, m)].clone()
        } else {
            F::zero()
        }
    }

    /// Lower and upper bandwidth of the stored window.
    pub fn bandwidth(&self) -> (usize, usize) {
        let (mut lo, mut hi) = (0, 0);
        for n in 0..self.t.rows() {
            for m in 0..self.t.cols() {
                if !self.t[(n, m)].is_zero() {
                    if n > m {
                        lo = lo.max(n - m);
                    } else {
                        hi = hi.max(m - n);
                    }
                }
            }
        }
        (lo, hi)
    }
}
