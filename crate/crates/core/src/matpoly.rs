//! Square matrix polynomials: leading structure, spectrum and Jordan chains.

use std::collections::HashMap;

use num::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::roots::{poly_roots, rationalize};
use crate::numerics::{BigFloat, DenseMatrix, NumericsError, Scalar, ScalarPoly};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatPolyError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("leading coefficients match no C1 pattern: {0}")]
    NotC1(String),
    #[error("determinant vanishes identically")]
    SingularPerturbation,
    #[error("{0} is not a root of the determinant")]
    NotAnEigenvalue(String),
    #[error("eigenvalue multiplicities add up to {found}, determinant degree is {expected}")]
    IncompleteSpectrum { found: usize, expected: usize },
    #[error("eigenvalue {0} is not real")]
    ComplexEigenvalue(String),
    #[error("eigenvalue near {0} is not a verifiable rational")]
    EigenvalueNotRational(String),
    #[error("Jordan chain defect: {0}")]
    ChainDefect(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// `R(x) = Σ_k R_k x^k` with square coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixPolynomial<F> {
    size: usize,
    coeffs: Vec<DenseMatrix<F>>,
}

/// Which normalization of the leading coefficients holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeadingCondition {
    /// Upper triangular nonsingular blocks.
    C1,
    /// Identity blocks.
    C2,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeadingStructure {
    pub degree: usize,
    pub r: usize,
    pub condition: LeadingCondition,
    /// `N p - r`, the degree of `det R`.
    pub det_degree: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JordanChain<F> {
    pub vectors: Vec<Vec<F>>,
}

impl<F> JordanChain<F> {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Eigenvalue<F> {
    pub value: F,
    pub multiplicity: usize,
    /// Right chains, longest first.
    pub right: Vec<JordanChain<F>>,
    /// Left chains, longest first.
    pub left: Vec<JordanChain<F>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralData<F: Scalar> {
    pub eigenvalues: Vec<Eigenvalue<F>>,
    pub det: ScalarPoly<F>,
}

/// Position of one chain vector: eigenvalue, chain, index in the chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Slot {
    pub eigen: usize,
    pub chain: usize,
    pub index: usize,
}

impl<F: Scalar> SpectralData<F> {
    pub fn total_multiplicity(&self) -> usize {
        self.eigenvalues.iter().map(|e| e.multiplicity).sum()
    }

    /// Slots of the right chains in eigenvalue, chain, index order.
    pub fn right_slots(&self) -> Vec<Slot> {
        Self::slots(self.eigenvalues.iter().map(|e| &e.right))
    }

    /// Slots of the left chains in eigenvalue, chain, index order.
    pub fn left_slots(&self) -> Vec<Slot> {
        Self::slots(self.eigenvalues.iter().map(|e| &e.left))
    }

    fn slots<'a>(it: impl Iterator<Item = &'a Vec<JordanChain<F>>>) -> Vec<Slot> {
        let mut out = Vec::new();
        for (i, chains) in it.enumerate() {
            for (j, c) in chains.iter().enumerate() {
                for k in 0..c.len() {
                    out.push(Slot { eigen: i, chain: j, index: k });
                }
            }
        }
        out
    }

    /// Whether every eigenvalue has a single chain of length one.
    pub fn is_simple(&self) -> bool {
        self.eigenvalues.iter().all(|e| e.multiplicity == 1)
    }

    /// Exchanges the roles of left and right chains (spectrum of `Rᵀ`).
    pub fn transposed(&self) -> Self {
        SpectralData {
            eigenvalues: self
                .eigenvalues
                .iter()
                .map(|e| Eigenvalue {
                    value: e.value.clone(),
                    multiplicity: e.multiplicity,
                    right: e.left.clone(),
                    left: e.right.clone(),
                })
                .collect(),
            det: self.det.clone(),
        }
    }
}

/// JSON layout `{"p": int, "coeffs": [[[num-string]]]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixPolynomialJson {
    pub p: usize,
    pub coeffs: Vec<Vec<Vec<String>>>,
}

impl<F: Scalar> MatrixPolynomial<F> {
    pub fn new(coeffs: Vec<DenseMatrix<F>>) -> Result<Self, MatPolyError> {
        let Some(first) = coeffs.first() else {
            return Err(MatPolyError::ShapeMismatch("no coefficients".into()));
        };
        let size = first.rows();
        if coeffs.iter().any(|c| c.rows() != size || c.cols() != size) {
            return Err(MatPolyError::ShapeMismatch("coefficients must be square and equal".into()));
        }
        Ok(MatrixPolynomial { size, coeffs })
    }

    /// Drops vanishing top coefficients.
    pub fn trimmed(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        while coeffs.len() > 1 && coeffs.last().is_some_and(DenseMatrix::is_zero) {
            coeffs.pop();
        }
        MatrixPolynomial { size: self.size, coeffs }
    }

    pub fn is_regular(&self) -> bool {
        !self.determinant_poly().is_zero()
    }

    /// `l`-th derivative.
    pub fn derivative(&self, l: usize) -> Self {
        if l > self.degree() {
            return MatrixPolynomial { size: self.size, coeffs: vec![DenseMatrix::zeros(self.size, self.size)] };
        }
        let coeffs = (l..self.coeffs.len())
            .map(|k| {
                let falling = (k + 1 - l..=k).fold(F::one(), |acc, i| acc * F::from_usize(i));
                self.coeffs[k].scale(&falling)
            })
            .collect();
        MatrixPolynomial { size: self.size, coeffs }.trimmed()
    }

    /// Builds from entry polynomials `entries[i][j]`.
    pub fn from_entries(entries: &[Vec<ScalarPoly<F>>]) -> Result<Self, MatPolyError> {
        let size = entries.len();
        if entries.iter().any(|r| r.len() != size) {
            return Err(MatPolyError::ShapeMismatch("entry table must be square".into()));
        }
        let deg = entries.iter().flatten().filter_map(ScalarPoly::degree).max().unwrap_or(0);
        let coeffs = (0..=deg)
            .map(|k| DenseMatrix::from_fn(size, size, |i, j| entries[i][j].coeff(k)))
            .collect();
        Self::new(coeffs)
    }

    pub fn identity(size: usize) -> Self {
        MatrixPolynomial { size, coeffs: vec![DenseMatrix::identity(size)] }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[DenseMatrix<F>] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> DenseMatrix<F> {
        self.coeffs.get(k).cloned().unwrap_or_else(|| DenseMatrix::zeros(self.size, self.size))
    }

    pub fn entry(&self, i: usize, j: usize) -> ScalarPoly<F> {
        ScalarPoly::new(self.coeffs.iter().map(|c| c[(i, j)].clone()).collect())
    }

    pub fn eval(&self, x: &F) -> DenseMatrix<F> {
        let mut acc = DenseMatrix::zeros(self.size, self.size);
        for c in self.coeffs.iter().rev() {
            acc = acc.scale(x).add(c);
        }
        acc
    }

    /// Taylor coefficient `R^{(k)}(x0)/k!`.
    pub fn taylor(&self, x0: &F, k: usize) -> DenseMatrix<F> {
        DenseMatrix::from_fn(self.size, self.size, |i, j| self.entry(i, j).taylor_coeff(x0, k))
    }

    pub fn taylor_coeffs(&self, x0: &F, count: usize) -> Vec<DenseMatrix<F>> {
        (0..count).map(|k| self.taylor(x0, k)).collect()
    }

    pub fn transpose(&self) -> Self {
        MatrixPolynomial { size: self.size, coeffs: self.coeffs.iter().map(DenseMatrix::transpose).collect() }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, MatPolyError> {
        if self.size != other.size {
            return Err(MatPolyError::ShapeMismatch("sizes differ".into()));
        }
        let mut coeffs = vec![DenseMatrix::zeros(self.size, self.size); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].add(&a.mul(b));
            }
        }
        Ok(Self::new(coeffs)?.trimmed())
    }

    /// Right multiplication by a constant matrix.
    pub fn mul_constant(&self, u: &DenseMatrix<F>) -> Result<Self, MatPolyError> {
        Self::new(self.coeffs.iter().map(|c| c.mul(u)).collect())
    }

    fn entry_table(&self) -> Vec<Vec<ScalarPoly<F>>> {
        (0..self.size).map(|i| (0..self.size).map(|j| self.entry(i, j)).collect()).collect()
    }

    /// `det R(x)` by cofactor expansion with memoized minors.
    pub fn determinant_poly(&self) -> ScalarPoly<F> {
        let table = self.entry_table();
        let rows: Vec<usize> = (0..self.size).collect();
        let cols: Vec<usize> = (0..self.size).collect();
        minor_det(&table, &rows, &cols)
    }

    /// Adjugate: `adj[i][j]` is the `(j, i)` cofactor.
    pub fn adjugate(&self) -> Vec<Vec<ScalarPoly<F>>> {
        let table = self.entry_table();
        let n = self.size;
        let mut adj = vec![vec![ScalarPoly::zero(); n]; n];
        if n == 1 {
            adj[0][0] = ScalarPoly::one();
            return adj;
        }
        for (i, row) in adj.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let rows: Vec<usize> = (0..n).filter(|&r| r != j).collect();
                let cols: Vec<usize> = (0..n).filter(|&c| c != i).collect();
                let m = minor_det(&table, &rows, &cols);
                *cell = if (i + j) % 2 == 0 { m } else { m.neg() };
            }
        }
        adj
    }

    pub fn adjugate_poly(&self) -> Self {
        let adj = self.adjugate();
        Self::from_entries(&adj).expect("square table").trimmed()
    }

    /// Detects `r` and whether the leading pair satisfies the upper
    /// triangular (C1) or identity (C2) pattern.
    pub fn check_leading(&self) -> Result<LeadingStructure, MatPolyError> {
        let p = self.size;
        let n = self.degree();
        let top = &self.coeffs[n];
        let rank = top.rank();
        if rank == 0 {
            return Err(MatPolyError::NotC1("leading coefficient vanishes".into()));
        }
        let r = p - rank;
        let scale = top.max_abs();
        let zero = |x: &F| x.is_negligible(&scale);
        for i in 0..p {
            for j in 0..p {
                let in_block = i < p - r && j >= r;
                if !in_block && !zero(&top[(i, j)]) {
                    return Err(MatPolyError::NotC1(format!(
                        "entry ({i},{j}) of the leading coefficient must vanish for r = {r}"
                    )));
                }
            }
        }
        let t_n = top.submatrix(0, p - r, r, p);
        check_upper_nonsingular(&t_n, "upper-right block of the leading coefficient")?;
        let mut identity = is_identity(&t_n);
        if r > 0 {
            if n == 0 {
                return Err(MatPolyError::NotC1("constant polynomial with r > 0".into()));
            }
            let t_prev = self.coeffs[n - 1].submatrix(p - r, p, 0, r);
            check_upper_nonsingular(&t_prev, "lower-left block of the subleading coefficient")?;
            identity = identity && is_identity(&t_prev);
        }
        Ok(LeadingStructure {
            degree: n,
            r,
            condition: if identity { LeadingCondition::C2 } else { LeadingCondition::C1 },
            det_degree: n * p - r,
        })
    }

    /// Rescales on the right by a constant upper triangular matrix `U` so
    /// that the identity pattern holds; returns `(R U, U)`.
    pub fn normalize_c2(&self) -> Result<(Self, DenseMatrix<F>), MatPolyError> {
        let s = self.check_leading()?;
        let p = self.size;
        let r = s.r;
        let n = s.degree;
        let t_n = self.coeffs[n].submatrix(0, p - r, r, p).inverse_upper()?;
        let mut u = DenseMatrix::zeros(p, p);
        for i in 0..p - r {
            for j in 0..p - r {
                u[(r + i, r + j)] = t_n[(i, j)].clone();
            }
        }
        if r > 0 {
            let t_prev = self.coeffs[n - 1].submatrix(p - r, p, 0, r).inverse_upper()?;
            for i in 0..r {
                for j in 0..r {
                    u[(i, j)] = t_prev[(i, j)].clone();
                }
            }
        }
        Ok((self.mul_constant(&u)?, u))
    }

    /// `R(Λᵀ)` truncated to `(n+1) p` rows and columns: block `(i, j)` is
    /// `R_{i-j}` for `0 <= i-j <= N`.
    pub fn banded_substitute(&self, n: usize) -> DenseMatrix<F> {
        let p = self.size;
        let dim = (n + 1) * p;
        DenseMatrix::from_fn(dim, dim, |i, j| {
            let (bi, bj) = (i / p, j / p);
            if bi < bj || bi - bj > self.degree() {
                return F::zero();
            }
            self.coeffs[bi - bj][(i % p, j % p)].clone()
        })
    }

    /// Eigenvalues with multiplicities and canonical left/right Jordan
    /// chains. Hints are verified exactly in exact mode; without hints the
    /// determinant's roots are found in floating point (and rationalized
    /// for exact scalars).
    pub fn spectrum(&self, hints: Option<&[F]>) -> Result<SpectralData<F>, MatPolyError> {
        let det = self.determinant_poly();
        let Some(deg) = det.degree() else {
            return Err(MatPolyError::SingularPerturbation);
        };
        let mut found: Vec<(F, usize)> = Vec::new();
        match hints {
            Some(hs) => {
                for h in hs {
                    if found.iter().any(|(x, _)| x == h) {
                        continue;
                    }
                    let m = det.root_multiplicity(h);
                    if m == 0 {
                        return Err(MatPolyError::NotAnEigenvalue(h.to_string()));
                    }
                    found.push((h.clone(), m));
                }
            }
            None => found = real_roots(&det)?,
        }
        let total: usize = found.iter().map(|(_, m)| m).sum();
        if total != deg {
            return Err(MatPolyError::IncompleteSpectrum { found: total, expected: deg });
        }
        let mut eigenvalues = Vec::with_capacity(found.len());
        for (x0, m) in found {
            let taylor = self.taylor_coeffs(&x0, m + 1);
            let right = canonical_chains(&taylor, m)?;
            let transposed: Vec<DenseMatrix<F>> = taylor.iter().map(DenseMatrix::transpose).collect();
            let left = canonical_chains(&transposed, m)?;
            eigenvalues.push(Eigenvalue { value: x0, multiplicity: m, right, left });
        }
        Ok(SpectralData { eigenvalues, det })
    }

    /// Residuals `Σ_{l<=i} R_[l](x0) v_{i-l}` (right) or
    /// `Σ_{l<=i} v_{i-l} R_[l](x0)` (left) for every `i`.
    pub fn chain_residuals(&self, x0: &F, chain: &JordanChain<F>, left: bool) -> Vec<Vec<F>> {
        let taylor = self.taylor_coeffs(x0, chain.len());
        (0..chain.len())
            .map(|i| {
                let mut acc = vec![F::zero(); self.size];
                for (l, t) in taylor.iter().enumerate().take(i + 1) {
                    let v = &chain.vectors[i - l];
                    let term = if left { t.vec_mul(v) } else { t.mul_vec(v) };
                    for (a, b) in acc.iter_mut().zip(term) {
                        *a = a.clone() + b;
                    }
                }
                acc
            })
            .collect()
    }

    /// Exact (or tolerance-based, for floats) check of the chain relations.
    pub fn verify_jordan_chain(&self, x0: &F, chain: &JordanChain<F>, left: bool) -> bool {
        if chain.is_empty() || chain.vectors[0].iter().all(|v| v.is_zero()) {
            return false;
        }
        let scale = self.coeffs.iter().fold(F::one(), |m, c| {
            let a = c.max_abs();
            if a > m {
                a
            } else {
                m
            }
        });
        self.chain_residuals(x0, chain, left).iter().flatten().all(|r| r.is_negligible(&scale))
    }

    pub fn to_json(&self) -> MatrixPolynomialJson {
        MatrixPolynomialJson {
            p: self.size,
            coeffs: self
                .coeffs
                .iter()
                .map(|c| (0..self.size).map(|i| c.row(i).iter().map(scalar_to_string).collect()).collect())
                .collect(),
        }
    }

    pub fn from_json(doc: &MatrixPolynomialJson) -> Result<Self, MatPolyError> {
        let mut coeffs = Vec::with_capacity(doc.coeffs.len());
        for (k, c) in doc.coeffs.iter().enumerate() {
            if c.len() != doc.p || c.iter().any(|r| r.len() != doc.p) {
                return Err(MatPolyError::Parse(format!("coefficient {k} is not {0}x{0}", doc.p)));
            }
            let rows: Result<Vec<Vec<F>>, MatPolyError> = c
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|s| {
                            crate::numerics::parse_rational(s)
                                .map(|q| F::from_rational(&q))
                                .ok_or_else(|| MatPolyError::Parse(format!("bad number {s:?}")))
                        })
                        .collect()
                })
                .collect();
            coeffs.push(DenseMatrix::from_rows(rows?)?);
        }
        Self::new(coeffs)
    }
}

/// Exact numbers print as `a/b`; floats through `Display`.
pub fn scalar_to_string<F: Scalar>(x: &F) -> String {
    if F::is_exact() {
        if let Some(r) = x.to_rational() {
            return rational_to_string(&r);
        }
    }
    x.to_string()
}

pub fn rational_to_string(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn is_identity<F: Scalar>(m: &DenseMatrix<F>) -> bool {
    let scale = F::one();
    (0..m.rows()).all(|i| {
        (0..m.cols()).all(|j| {
            let want = if i == j { F::one() } else { F::zero() };
            (m[(i, j)].clone() - want).is_negligible(&scale)
        })
    })
}

fn check_upper_nonsingular<F: Scalar>(m: &DenseMatrix<F>, what: &str) -> Result<(), MatPolyError> {
    let scale = m.max_abs();
    for i in 0..m.rows() {
        if m[(i, i)].is_negligible(&scale) {
            return Err(MatPolyError::NotC1(format!("{what} is singular")));
        }
        for j in 0..i {
            if !m[(i, j)].is_negligible(&scale) {
                return Err(MatPolyError::NotC1(format!("{what} is not upper triangular")));
            }
        }
    }
    Ok(())
}

fn minor_det<F: Scalar>(table: &[Vec<ScalarPoly<F>>], rows: &[usize], cols: &[usize]) -> ScalarPoly<F> {
    let mut memo: HashMap<u64, ScalarPoly<F>> = HashMap::new();
    let full: u64 = (0..cols.len()).fold(0, |m, k| m | (1 << k));
    minor_rec(table, rows, cols, 0, full, &mut memo)
}

fn minor_rec<F: Scalar>(
    table: &[Vec<ScalarPoly<F>>],
    rows: &[usize],
    cols: &[usize],
    depth: usize,
    mask: u64,
    memo: &mut HashMap<u64, ScalarPoly<F>>,
) -> ScalarPoly<F> {
    if depth == rows.len() {
        return ScalarPoly::one();
    }
    if let Some(v) = memo.get(&mask) {
        return v.clone();
    }
    let mut acc = ScalarPoly::zero();
    let mut sign_pos = 0;
    for (k, &c) in cols.iter().enumerate() {
        if mask & (1 << k) == 0 {
            continue;
        }
        let entry = &table[rows[depth]][c];
        if !entry.is_zero() {
            let sub = minor_rec(table, rows, cols, depth + 1, mask & !(1 << k), memo);
            let term = entry.mul(&sub);
            acc = if sign_pos % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
        }
        sign_pos += 1;
    }
    memo.insert(mask, acc.clone());
    acc
}

type Wide = BigFloat<512>;

fn real_roots<F: Scalar>(det: &ScalarPoly<F>) -> Result<Vec<(F, usize)>, MatPolyError> {
    let wide: Option<Vec<Wide>> =
        det.coeffs().iter().map(|c| c.to_rational().map(|r| Wide::from_rational(&r))).collect();
    let wide = wide.ok_or_else(|| MatPolyError::Parse("determinant coefficients are not finite".into()))?;
    let roots = poly_roots(&ScalarPoly::new(wide))?;
    let mut out = Vec::new();
    let tol = Wide::from_ratio(1, 1_000_000_000);
    for root in roots {
        if root.value.im.abs_val() > tol {
            return Err(MatPolyError::ComplexEigenvalue(format!("{} + {} i", root.value.re.to_f64(), root.value.im.to_f64())));
        }
        let x = if F::is_exact() {
            let q = rationalize(&root.value.re, 1_000_000)
                .ok_or_else(|| MatPolyError::EigenvalueNotRational(root.value.re.to_f64().to_string()))?;
            let x = F::from_rational(&q);
            if det.root_multiplicity(&x) != root.multiplicity {
                return Err(MatPolyError::EigenvalueNotRational(root.value.re.to_f64().to_string()));
            }
            x
        } else {
            let q = root.value.re.to_rational().expect("finite root");
            F::from_rational(&q)
        };
        out.push((x, root.multiplicity));
    }
    Ok(out)
}

fn block_toeplitz<F: Scalar>(taylor: &[DenseMatrix<F>], k: usize) -> DenseMatrix<F> {
    let p = taylor[0].rows();
    DenseMatrix::from_fn(k * p, k * p, |i, j| {
        let (bi, bj) = (i / p, j / p);
        if bi < bj {
            F::zero()
        } else {
            taylor.get(bi - bj).map_or_else(F::zero, |t| t[(i % p, j % p)].clone())
        }
    })
}

fn row_space_basis<F: Scalar>(vectors: &[Vec<F>], dim: usize) -> Vec<Vec<F>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let m = DenseMatrix::from_fn(vectors.len(), dim, |i, j| vectors[i][j].clone());
    let e = m.rref();
    (0..e.pivots.len()).map(|i| e.matrix.row(i)).collect()
}

/// Canonical right chains from Taylor coefficients `R_[l](x0)`.
///
/// Leading vectors come from reduced echelon bases of the nested spaces of
/// chain heads, longest chains first; each chain is completed by the
/// particular solution with free variables set to zero.
fn canonical_chains<F: Scalar>(taylor: &[DenseMatrix<F>], mult: usize) -> Result<Vec<JordanChain<F>>, MatPolyError> {
    let p = taylor[0].rows();
    let mut heads: Vec<Vec<Vec<F>>> = Vec::new();
    for k in 1..=mult {
        let ker = block_toeplitz(taylor, k).nullspace();
        let proj: Vec<Vec<F>> = ker.iter().map(|v| v[..p].to_vec()).collect();
        let basis = row_space_basis(&proj, p);
        if basis.is_empty() {
            break;
        }
        heads.push(basis);
    }
    let mut chosen: Vec<(Vec<F>, usize)> = Vec::new();
    for k in (1..=heads.len()).rev() {
        for w in &heads[k - 1] {
            let mut trial: Vec<Vec<F>> = chosen.iter().map(|(v, _)| v.clone()).collect();
            let before = row_space_basis(&trial, p).len();
            trial.push(w.clone());
            if row_space_basis(&trial, p).len() > before {
                chosen.push((w.clone(), k));
            }
        }
    }
    let mut chains = Vec::with_capacity(chosen.len());
    for (v0, len) in chosen {
        chains.push(complete_chain(taylor, v0, len)?);
    }
    let total: usize = chains.iter().map(JordanChain::len).sum();
    if total != mult {
        return Err(MatPolyError::ChainDefect(format!(
            "chain lengths add up to {total}, algebraic multiplicity is {mult}"
        )));
    }
    Ok(chains)
}

fn complete_chain<F: Scalar>(taylor: &[DenseMatrix<F>], v0: Vec<F>, len: usize) -> Result<JordanChain<F>, MatPolyError> {
    let p = v0.len();
    if len == 1 {
        return Ok(JordanChain { vectors: vec![v0] });
    }
    let unknowns = (len - 1) * p;
    let a = DenseMatrix::from_fn(unknowns, unknowns, |i, j| {
        let (bi, bj) = (i / p, j / p);
        if bi < bj {
            F::zero()
        } else {
            taylor.get(bi - bj).map_or_else(F::zero, |t| t[(i % p, j % p)].clone())
        }
    });
    let mut b = vec![F::zero(); unknowns];
    for i in 1..len {
        if let Some(t) = taylor.get(i) {
            let tv = t.mul_vec(&v0);
            for (r, x) in tv.into_iter().enumerate() {
                b[(i - 1) * p + r] = -x;
            }
        }
    }
    let y = a
        .solve_particular(&b)
        .map_err(|_| MatPolyError::ChainDefect("chain cannot be completed".into()))?;
    let mut vectors = vec![v0];
    for i in 0..len - 1 {
        vectors.push(y[i * p..(i + 1) * p].to_vec());
    }
    Ok(JordanChain { vectors })
}
