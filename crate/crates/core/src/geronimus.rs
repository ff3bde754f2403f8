//! Geronimus perturbations: connection matrix, 𝔻/𝕎/𝕂/ℙ tables,
//! τ-determinants and Christoffel type formulas.

use serde::Serialize;
use thiserror::Error;

use crate::kernels::{self, cd_boundary_terms, cauchy_d_jets, cauchy_table, KernelError};
use crate::matpoly::{MatPolyError, MatrixPolynomial, Slot, SpectralData};
use crate::measures::{perturb_left, perturb_right, MassParameters, MatrixOfMeasures, MeasureError, PerturbOptions};
use crate::mops::{GaussBorel, MopsError, RecurrenceMatrix};
use crate::numerics::{DenseMatrix, NumericsError, Scalar, ScalarPoly};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeronimusError {
    #[error("tau_{n} vanishes")]
    TauZero { n: usize },
    #[error("the window system for row {n} of the connection matrix is singular")]
    SingularSystem { n: usize },
    #[error("index {n} needs at least {needed}")]
    Window { n: usize, needed: usize },
    #[error("{0} is an eigenvalue of the perturbation")]
    EigenvalueArgument(String),
    #[error("this path needs simple eigenvalues")]
    NotSimple,
    #[error("{0}")]
    ChainDefect(String),
    #[error("{0} mismatch between the two computation paths")]
    PathMismatch(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Mops(#[from] MopsError),
    #[error(transparent)]
    MatPoly(#[from] MatPolyError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

type Result<T> = std::result::Result<T, GeronimusError>;

/// A right perturbation `dμ̌ R = dμ` with its spectral data and masses.
#[derive(Clone, Debug)]
pub struct Perturbation<F: Scalar> {
    pub r: MatrixPolynomial<F>,
    pub spec: SpectralData<F>,
    pub xi: MassParameters<F>,
}

impl<F: Scalar> Perturbation<F> {
    pub fn new(r: MatrixPolynomial<F>, spec: SpectralData<F>, xi: MassParameters<F>) -> Result<Self> {
        let m = spec.total_multiplicity();
        if xi.len() != m {
            return Err(MeasureError::MassCountMismatch { expected: m, found: xi.len() }.into());
        }
        let deg = spec.det.degree().unwrap_or(0);
        if deg != m {
            return Err(GeronimusError::ChainDefect(format!(
                "chains cover {m} of the {deg} zeros of det R"
            )));
        }
        for e in &spec.eigenvalues {
            let right: usize = e.right.iter().map(|c| c.len()).sum();
            let left: usize = e.left.iter().map(|c| c.len()).sum();
            if right != e.multiplicity || left != e.multiplicity {
                return Err(GeronimusError::ChainDefect(format!(
                    "chains at {} have lengths {right}/{left}, multiplicity {}",
                    e.value, e.multiplicity
                )));
            }
        }
        Ok(Perturbation { r, spec, xi })
    }

    /// Computes the spectrum of `r` (optionally from eigenvalue hints).
    pub fn from_polynomial(r: MatrixPolynomial<F>, xi: MassParameters<F>, hints: Option<&[F]>) -> Result<Self> {
        let spec = r.spectrum(hints)?;
        Self::new(r, spec, xi)
    }

    /// `M = Np - r`, the number of mass slots.
    pub fn window(&self) -> usize {
        self.spec.total_multiplicity()
    }

    /// The perturbed matrix of measures.
    pub fn apply(&self, mom: &MatrixOfMeasures<F>, opts: PerturbOptions) -> Result<MatrixOfMeasures<F>> {
        Ok(perturb_right(mom, &self.r, &self.spec, &self.xi, opts)?)
    }

    /// Right chain vector for a slot.
    pub fn right_vector(&self, s: Slot) -> &[F] {
        &self.spec.eigenvalues[s.eigen].right[s.chain].vectors[s.index]
    }

    /// `ℙ(x)`: per right slot `(i, j, k)` the `p`-vector
    /// `Σ_{l<=k} v^R_{i,j;k-l} / (x - x_i)^{l+1}`.
    pub fn p_columns(&self, x: &F) -> Result<Vec<Vec<F>>> {
        let p = self.r.size();
        let mut out = Vec::new();
        for s in self.spec.right_slots() {
            let x0 = &self.spec.eigenvalues[s.eigen].value;
            let d = x.clone() - x0.clone();
            if d.is_zero() {
                return Err(GeronimusError::EigenvalueArgument(x.to_string()));
            }
            let inv = F::one() / d;
            let chain = &self.spec.eigenvalues[s.eigen].right[s.chain];
            let mut v = vec![F::zero(); p];
            for l in 0..=s.index {
                let w = inv.powi(l + 1);
                for (va, c) in v.iter_mut().zip(&chain.vectors[s.index - l]) {
                    *va = va.clone() + w.clone() * c.clone();
                }
            }
            out.push(v);
        }
        Ok(out)
    }
}

/// Rows `𝔻_n` and `𝕎_n` for `n = 0..=n_max`, one column per right slot.
#[derive(Clone, Debug)]
pub struct DwTable<F: Scalar> {
    pub slots: Vec<Slot>,
    pub dd: Vec<Vec<F>>,
    pub ww: Vec<Vec<F>>,
}

impl<F: Scalar> DwTable<F> {
    pub fn window(&self) -> usize {
        self.slots.len()
    }

    pub fn len(&self) -> usize {
        self.dd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dd.is_empty()
    }

    /// `𝔻_n - 𝕎_n`.
    pub fn row(&self, n: usize) -> Vec<F> {
        self.dd[n].iter().zip(&self.ww[n]).map(|(d, w)| d.clone() - w.clone()).collect()
    }

    fn check(&self, n: usize) -> Result<()> {
        if n >= self.len() {
            return Err(GeronimusError::Window { n, needed: n + 1 });
        }
        Ok(())
    }

    fn block(&self, rows: impl Iterator<Item = usize>) -> DenseMatrix<F> {
        let rows: Vec<Vec<F>> = rows.map(|n| self.row(n)).collect();
        if rows.is_empty() {
            return DenseMatrix::zeros(0, 0);
        }
        DenseMatrix::from_rows(rows).expect("rows share the window width")
    }

    /// `τ_n`, the determinant of rows `n-M+1..=n`, for `n >= M-1`.
    pub fn tau(&self, n: usize) -> Result<F> {
        let m = self.window();
        if n + 1 < m {
            return Err(GeronimusError::Window { n, needed: m - 1 });
        }
        self.check(n)?;
        det(&self.block(n + 1 - m..=n))
    }

    /// `τ_n^{(i)}`: rows `n-M..=n` with row `n-i` removed, `n >= M`.
    pub fn tau_minor(&self, n: usize, i: usize) -> Result<F> {
        let m = self.window();
        if n < m {
            return Err(GeronimusError::Window { n, needed: m });
        }
        self.check(n)?;
        det(&self.block((n - m..=n).filter(|&k| k != n - i)))
    }

    /// `[Ω_{n,n-M} … Ω_{n,n-1}]` from the window system, `n >= M`.
    pub fn omega_row(&self, n: usize) -> Result<Vec<F>> {
        let m = self.window();
        if n < m {
            return Err(GeronimusError::Window { n, needed: m });
        }
        self.check(n)?;
        if m == 0 {
            return Ok(Vec::new());
        }
        let g = self.block(n - m..n);
        let rhs: Vec<F> = self.row(n).into_iter().map(|x| -x).collect();
        g.solve_left(&rhs).map_err(|e| match e {
            NumericsError::Singular | NumericsError::SingularMinor { .. } => GeronimusError::SingularSystem { n },
            e => e.into(),
        })
    }

    /// The same row from `Ω_{n,n-i} = (-1)^i τ_n^{(i)} / τ_{n-1}`.
    pub fn omega_row_closed(&self, n: usize) -> Result<Vec<F>> {
        let m = self.window();
        let prev = self.tau(n.checked_sub(1).ok_or(GeronimusError::Window { n, needed: m })?)?;
        if prev.is_zero() {
            return Err(GeronimusError::SingularSystem { n });
        }
        (1..=m)
            .rev()
            .map(|i| {
                let s = if i % 2 == 0 { F::one() } else { -F::one() };
                Ok(s * self.tau_minor(n, i)? / prev.clone())
            })
            .collect()
    }

    /// `B̌_n` from the bordered determinant over rows `n-M..=n`, `n >= M`.
    pub fn christoffel_b(&self, f: &GaussBorel<F>, n: usize) -> Result<Vec<ScalarPoly<F>>> {
        let m = self.window();
        if n < m {
            return Err(GeronimusError::Window { n, needed: m });
        }
        self.check(n)?;
        let rows: Vec<Vec<F>> = (n - m..=n).map(|k| self.row(k)).collect();
        let cof = cofactors_last_column(&rows)?;
        let tau = cof[m].clone();
        if tau.is_zero() {
            return Err(GeronimusError::TauZero { n: n - 1 });
        }
        let mut out = vec![ScalarPoly::zero(); f.q()];
        for (t, c) in cof.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let w = c.clone() / tau.clone();
            for (o, bp) in out.iter_mut().zip(f.b(n - m + t)) {
                *o = o.add(&bp.scale(&w));
            }
        }
        Ok(out)
    }

    /// `B̌_n = B_n + Σ Ω_{n,k} B_k` with the solved connection row.
    pub fn christoffel_b_via_omega(&self, f: &GaussBorel<F>, n: usize) -> Result<Vec<ScalarPoly<F>>> {
        let m = self.window();
        let row = self.omega_row(n)?;
        Ok(combine_b(f, n, n - m, &row))
    }
}

fn det<F: Scalar>(m: &DenseMatrix<F>) -> Result<F> {
    if m.rows() == 0 {
        return Ok(F::one());
    }
    Ok(m.determinant()?)
}

/// For `M+1` rows of width `M`, the cofactors `c_t` with
/// `det[rows | col] = Σ_t c_t col_t`.
fn cofactors_last_column<F: Scalar>(rows: &[Vec<F>]) -> Result<Vec<F>> {
    let k = rows.len();
    let mut out = Vec::with_capacity(k);
    for t in 0..k {
        let minor: Vec<Vec<F>> =
            rows.iter().enumerate().filter(|(i, _)| *i != t).map(|(_, r)| r.clone()).collect();
        let d = if minor.is_empty() { F::one() } else { DenseMatrix::from_rows(minor)?.determinant()? };
        out.push(if (t + k - 1) % 2 == 0 { d } else { -d });
    }
    Ok(out)
}

/// For `M-1` rows of width `M`, the cofactors `c_s` with
/// `det[rows; u] = Σ_s c_s u_s`.
fn cofactors_last_row<F: Scalar>(rows: &[Vec<F>], width: usize) -> Result<Vec<F>> {
    let mut out = Vec::with_capacity(width);
    for s in 0..width {
        let minor: Vec<Vec<F>> = rows
            .iter()
            .map(|r| r.iter().enumerate().filter(|(j, _)| *j != s).map(|(_, v)| v.clone()).collect())
            .collect();
        let d = if minor.is_empty() { F::one() } else { DenseMatrix::from_rows(minor)?.determinant()? };
        out.push(if (width - 1 + s) % 2 == 0 { d } else { -d });
    }
    Ok(out)
}

fn combine_b<F: Scalar>(f: &GaussBorel<F>, n: usize, start: usize, row: &[F]) -> Vec<ScalarPoly<F>> {
    let mut out: Vec<ScalarPoly<F>> = f.b(n).to_vec();
    for (t, w) in row.iter().enumerate() {
        if w.is_zero() {
            continue;
        }
        for (o, bp) in out.iter_mut().zip(f.b(start + t)) {
            *o = o.add(&bp.scale(w));
        }
    }
    out
}

/// Taylor coefficients of `B_n^{(b)}(x) ξ_{slot;b}(x)` summed over `b`.
fn b_xi_jet<F: Scalar>(f: &GaussBorel<F>, n: usize, x0: &F, xi: &MassParameters<F>, slot: usize, order: usize) -> Vec<F> {
    let mut out = vec![F::zero(); order];
    for (b, bp) in f.b(n).iter().enumerate() {
        let bj: Vec<F> = (0..order).map(|u| bp.taylor_coeff(x0, u)).collect();
        for (m, o) in out.iter_mut().enumerate() {
            for (u, bu) in bj.iter().enumerate().take(m + 1) {
                let c = xi.coeff(slot, b, m - u);
                if !c.is_zero() {
                    *o = o.clone() + bu.clone() * c;
                }
            }
        }
    }
    out
}

/// The 𝔻/𝕎 table for `n = 0..=n_max`.
pub fn dw_table<F: Scalar>(
    f: &GaussBorel<F>,
    mom: &MatrixOfMeasures<F>,
    pert: &Perturbation<F>,
    n_max: usize,
) -> Result<DwTable<F>> {
    let count = n_max + 1;
    if f.len() < count {
        return Err(MopsError::SlackExceeded { index: n_max, needed: count, available: f.len() }.into());
    }
    let p = f.p();
    let slots = pert.spec.right_slots();
    let left_slots = pert.spec.left_slots();
    let mut dd = vec![Vec::with_capacity(slots.len()); count];
    let mut ww = vec![Vec::with_capacity(slots.len()); count];
    for (i, e) in pert.spec.eigenvalues.iter().enumerate() {
        let kappa = e.right.iter().map(|c| c.len()).max().unwrap_or(0);
        if kappa == 0 {
            continue;
        }
        let mut columns = vec![false; p];
        for c in &e.right {
            for v in &c.vectors {
                for (a, va) in v.iter().enumerate() {
                    columns[a] |= !va.is_zero();
                }
            }
        }
        let d = cauchy_d_jets(f, mom, &e.value, count, kappa, &columns)?;
        let rt = pert.r.taylor_coeffs(&e.value, 2 * kappa + 1);
        let rt_at = |m: usize| rt.get(m).cloned().unwrap_or_else(|| DenseMatrix::zeros(p, p));
        // Σ_{l<=k} R_{[s+1+l]} v^R_{i,j;k-l} per (chain j, index k, shift s)
        let right_sum = |j: usize, k: usize, s: usize| -> Vec<F> {
            let mut acc = vec![F::zero(); p];
            for l in 0..=k {
                let v = rt_at(s + 1 + l).mul_vec(&e.right[j].vectors[k - l]);
                for (a, x) in acc.iter_mut().zip(v) {
                    *a = a.clone() + x;
                }
            }
            acc
        };
        let left_index = |j: usize, k: usize| {
            left_slots
                .iter()
                .position(|s| s.eigen == i && s.chain == j && s.index == k)
                .expect("left slot exists")
        };
        for n in 0..count {
            let jets: Vec<Vec<Vec<F>>> = e
                .left
                .iter()
                .enumerate()
                .map(|(jp, c)| (0..c.len()).map(|kp| b_xi_jet(f, n, &e.value, &pert.xi, left_index(jp, kp), kappa)).collect())
                .collect();
            for (j, chain) in e.right.iter().enumerate() {
                for k in 0..chain.len() {
                    let mut dv = F::zero();
                    for l in 0..=k {
                        let v = &chain.vectors[k - l];
                        for a in 0..p {
                            if !v[a].is_zero() {
                                dv = dv + d[l][n][a].clone() * v[a].clone();
                            }
                        }
                    }
                    let mut wv = F::zero();
                    for (jp, lchain) in e.left.iter().enumerate() {
                        for kp in 0..lchain.len() {
                            for lp in 0..=kp {
                                let vl = &lchain.vectors[kp - lp];
                                for s in 0..=lp {
                                    let g = jets[jp][kp][lp - s].clone();
                                    if g.is_zero() {
                                        continue;
                                    }
                                    let rv = right_sum(j, k, s);
                                    let dot = vl.iter().zip(&rv).fold(F::zero(), |acc, (a, b)| acc + a.clone() * b.clone());
                                    wv = wv + g * dot;
                                }
                            }
                        }
                    }
                    dd[n].push(dv);
                    ww[n].push(wv);
                }
            }
        }
    }
    Ok(DwTable { slots, dd, ww })
}

/// `𝕀 = S 𝓜̌`, truncated to `size × size`.
pub fn i_matrix<F: Scalar>(f: &GaussBorel<F>, perturbed: &MatrixOfMeasures<F>, size: usize) -> Result<DenseMatrix<F>> {
    if f.len() < size {
        return Err(MopsError::SlackExceeded { index: size, needed: size, available: f.len() }.into());
    }
    let m = perturbed.scalar_moment_matrix(size, size)?;
    Ok(f.s().leading(size).mul(&m))
}

/// `τ̃_n = det 𝕀^{[n]}`.
pub fn tau_tilde<F: Scalar>(i_mat: &DenseMatrix<F>, n: usize) -> Result<F> {
    det(&i_mat.leading(n + 1))
}

/// `[Ω_{n,0} … Ω_{n,n-1}]` from the 𝕀 system.
pub fn omega_row_small<F: Scalar>(i_mat: &DenseMatrix<F>, n: usize) -> Result<Vec<F>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let g = i_mat.leading(n);
    let rhs: Vec<F> = (0..n).map(|l| -i_mat[(n, l)].clone()).collect();
    g.solve_left(&rhs).map_err(|e| match e {
        NumericsError::Singular | NumericsError::SingularMinor { .. } => GeronimusError::SingularSystem { n },
        e => e.into(),
    })
}

/// `B̌_n` for any `n`: 𝕀 system below the window, bordered determinant above.
pub fn christoffel_b_any<F: Scalar>(
    f: &GaussBorel<F>,
    dw: &DwTable<F>,
    i_mat: &DenseMatrix<F>,
    n: usize,
) -> Result<Vec<ScalarPoly<F>>> {
    if n >= dw.window() {
        dw.christoffel_b(f, n)
    } else {
        Ok(combine_b(f, n, 0, &omega_row_small(i_mat, n)?))
    }
}

/// `𝕂^{[m]}(x)`: per slot, `Σ_{r<=m} A_r(x) (𝔻_r - 𝕎_r)`.
pub fn kbb<F: Scalar>(f: &GaussBorel<F>, dw: &DwTable<F>, m: usize, x: &F) -> Result<Vec<Vec<F>>> {
    dw.check(m)?;
    let p = f.p();
    let mut out = vec![vec![F::zero(); p]; dw.window()];
    for r in 0..=m {
        let a = f.a_at(r, x);
        for (s, d) in dw.row(r).into_iter().enumerate() {
            for (o, av) in out[s].iter_mut().zip(&a) {
                *o = o.clone() + av.clone() * d.clone();
            }
        }
    }
    Ok(out)
}

/// The same vectors through the recurrence matrix: only `p + q` terms,
/// using `∫ K^{[m]}(x,t) dμ(t) = I`. Simple eigenvalues, `m >= p - 1`.
pub fn kbb_recurrence<F: Scalar>(
    f: &GaussBorel<F>,
    t: &RecurrenceMatrix<F>,
    dw: &DwTable<F>,
    pert: &Perturbation<F>,
    m: usize,
    x: &F,
) -> Result<Vec<Vec<F>>> {
    if !pert.spec.is_simple() {
        return Err(GeronimusError::NotSimple);
    }
    if m + 1 < f.p() {
        return Err(KernelError::ThresholdTooSmall { n: m, needed: f.p() - 1 }.into());
    }
    dw.check(m + f.q())?;
    let mut out = Vec::with_capacity(dw.window());
    for (s, slot) in dw.slots.iter().enumerate() {
        let x0 = &pert.spec.eigenvalues[slot.eigen].value;
        let dx = x.clone() - x0.clone();
        if dx.is_zero() {
            return Err(GeronimusError::EigenvalueArgument(x.to_string()));
        }
        let v = pert.right_vector(*slot);
        let b = cd_boundary_terms(f, t, m, |i| f.a_at(i, x), |i| vec![dw.row(i)[s].clone()])?;
        out.push((0..f.p()).map(|a| (b[(a, 0)].clone() - v[a].clone()) / dx.clone()).collect());
    }
    Ok(out)
}

/// Which route builds `𝕂`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KbbRoute {
    Direct,
    Recurrence,
}

/// `Ǎ_n(x) = -(1/τ_n) R(x) w(x)`, with `w_ã` the determinant of rows
/// `n-M+1..n-1` bordered by `𝕂_ã^{[n-M]}(x) + ℙ_ã(x)`; `n >= M`.
pub fn christoffel_a<F: Scalar>(
    f: &GaussBorel<F>,
    dw: &DwTable<F>,
    pert: &Perturbation<F>,
    n: usize,
    x: &F,
    route: KbbRoute,
) -> Result<Vec<F>> {
    let m = dw.window();
    if n < m {
        return Err(GeronimusError::Window { n, needed: m });
    }
    if m == 0 {
        return Ok(pert.r.eval(x).mul_vec(&f.a_at(n, x)));
    }
    let tau = dw.tau(n)?;
    if tau.is_zero() {
        return Err(GeronimusError::TauZero { n });
    }
    let pc = pert.p_columns(x)?;
    let k = match route {
        KbbRoute::Direct => kbb(f, dw, n - m, x)?,
        KbbRoute::Recurrence => {
            let t = f.recurrence_matrix();
            kbb_recurrence(f, &t, dw, pert, n - m, x)?
        }
    };
    let rows: Vec<Vec<F>> = (n + 1 - m..n).map(|r| dw.row(r)).collect();
    let cof = cofactors_last_row(&rows, m)?;
    let p = f.p();
    let w: Vec<F> = (0..p)
        .map(|a| (0..m).fold(F::zero(), |acc, s| acc + cof[s].clone() * (k[s][a].clone() + pc[s][a].clone())))
        .collect();
    let rw = pert.r.eval(x).mul_vec(&w);
    Ok(rw.into_iter().map(|v| -v / tau.clone()).collect())
}

/// Connection matrix by both expressions, `Š S⁻¹` and `Ȟ S̄̌⁻ᵀ R(Λᵀ) S̄ᵀ H⁻¹`
/// (the second on its leading `len - (N+1)p` columns).
#[derive(Clone, Debug)]
pub struct ConnectionMatrix<F: Scalar> {
    pub omega: DenseMatrix<F>,
    pub omega_h: DenseMatrix<F>,
}

impl<F: Scalar> ConnectionMatrix<F> {
    pub fn get(&self, n: usize, m: usize) -> F {
        if n < self.omega.rows() && m < self.omega.cols() {
            self.omega[(n, m)].clone()
        } else {
            F::zero()
        }
    }

    /// Number of nonzero subdiagonals.
    pub fn bandwidth(&self) -> usize {
        let mut bw = 0;
        for n in 0..self.omega.rows() {
            for m in 0..n {
                if !self.omega[(n, m)].is_negligible(&F::one()) {
                    bw = bw.max(n - m);
                }
            }
        }
        bw
    }

    /// Whether the two expressions agree on their common window.
    pub fn consistent(&self) -> bool {
        let k = self.omega_h.rows();
        let diff = self.omega.leading(k).sub(&self.omega_h);
        diff.is_zero() || (!F::is_exact() && diff.max_abs().is_negligible(&self.omega.max_abs()))
    }

    /// `[Ω_{n,n-M} … Ω_{n,n-1}]`.
    pub fn row_window(&self, n: usize, m: usize) -> Vec<F> {
        (n - m..n).map(|k| self.get(n, k)).collect()
    }
}

pub fn omega_full<F: Scalar>(f: &GaussBorel<F>, fp: &GaussBorel<F>, r: &MatrixPolynomial<F>) -> Result<ConnectionMatrix<F>> {
    let dim = f.len().min(fp.len());
    let omega = fp.s().leading(dim).mul(&f.s_inverse().leading(dim));
    let p = f.p();
    let k = dim.saturating_sub((r.degree() + 1) * p);
    let blocks = dim.div_ceil(p);
    let band = r.banded_substitute(blocks).submatrix(0, dim, 0, dim);
    let sbar_check_inv_t = fp.sbar().leading(dim).inverse_lower()?.transpose();
    let left = DenseMatrix::from_fn(k, dim, |i, j| fp.h()[i].clone() * sbar_check_inv_t[(i, j)].clone());
    let right = DenseMatrix::from_fn(dim, k, |i, j| f.sbar()[(j, i)].clone() / f.h()[j].clone());
    let omega_h = left.mul(&band).mul(&right);
    Ok(ConnectionMatrix { omega, omega_h })
}

/// Maximum residuals of `ǍΩ = RA`, `ΩB = B̌`, `ČΩ = C` and
/// `ĎR = ΩD + ∫B̌ dμ̌ (R(x)-R(y))/(x-y)` at a point `x`.
#[derive(Clone, Debug)]
pub struct ConnectionReport<F> {
    pub a: F,
    pub b: F,
    pub c: F,
    pub d: F,
}

impl<F: Scalar> ConnectionReport<F> {
    pub fn is_zero(&self) -> bool {
        [&self.a, &self.b, &self.c, &self.d].iter().all(|v| v.is_negligible(&F::one()))
    }
}

fn max_abs_vec<F: Scalar>(acc: F, v: &[F]) -> F {
    v.iter().fold(acc, |m, x| {
        let a = x.abs_val();
        if a > m {
            a
        } else {
            m
        }
    })
}

/// Checks rows/columns `0..limit`; `x` must be off both supports.
#[allow(clippy::too_many_arguments)]
pub fn connection_check<F: Scalar>(
    f: &GaussBorel<F>,
    fp: &GaussBorel<F>,
    mom: &MatrixOfMeasures<F>,
    perturbed: &MatrixOfMeasures<F>,
    r: &MatrixPolynomial<F>,
    omega: &ConnectionMatrix<F>,
    limit: usize,
    x: &F,
) -> Result<ConnectionReport<F>> {
    let (p, q) = (f.p(), f.q());
    let band = omega.bandwidth();
    let span = limit + band + 1;
    if span > omega.omega.rows() {
        return Err(MopsError::SlackExceeded { index: limit, needed: span, available: omega.omega.rows() }.into());
    }
    let ct = cauchy_table(f, mom, x, span, 1)?;
    let cpt = cauchy_table(fp, perturbed, x, span, 1)?;
    let rx = r.eval(x);
    let mut res = ConnectionReport { a: F::zero(), b: F::zero(), c: F::zero(), d: F::zero() };
    for m in 0..limit {
        let mut av = rx.mul_vec(&f.a_at(m, x)).into_iter().map(|v| -v).collect::<Vec<F>>();
        let mut cv: Vec<F> = ct.c_at(m).into_iter().map(|v| -v).collect();
        for n in m..=m + band {
            let w = omega.get(n, m);
            for (o, v) in av.iter_mut().zip(fp.a_at(n, x)) {
                *o = o.clone() + v * w.clone();
            }
            for (o, v) in cv.iter_mut().zip(cpt.c_at(n)) {
                *o = o.clone() + v * w.clone();
            }
        }
        res.a = max_abs_vec(res.a, &av);
        res.c = max_abs_vec(res.c, &cv);
    }
    for n in 0..limit {
        let mut bv = fp.b_at(n, x);
        let mut dv = rx.vec_mul(&cpt.d_at(n));
        for k in n.saturating_sub(band)..=n {
            let w = omega.get(n, k);
            for (o, v) in bv.iter_mut().zip(f.b_at(k, x)) {
                *o = o.clone() - v * w.clone();
            }
            for (o, v) in dv.iter_mut().zip(ct.d_at(k)) {
                *o = o.clone() - v * w.clone();
            }
        }
        // ∫B̌_n dμ̌ y^{j-1} R_i x^{i-j}
        for i in 1..=r.degree() {
            for j in 1..=i {
                let mut row = vec![F::zero(); p];
                for (a, o) in row.iter_mut().enumerate() {
                    for b in 0..q {
                        for (c, coef) in fp.b(n)[b].coeffs().iter().enumerate() {
                            if !coef.is_zero() {
                                *o = o.clone() + coef.clone() * perturbed.moment(b, a, c + j - 1)?;
                            }
                        }
                    }
                }
                let corr = r.coeff(i).vec_mul(&row);
                let xp = x.powi(i - j);
                for (o, v) in dv.iter_mut().zip(corr) {
                    *o = o.clone() - v * xp.clone();
                }
            }
        }
        res.b = max_abs_vec(res.b, &bv);
        res.d = max_abs_vec(res.d, &dv);
    }
    Ok(res)
}

/// Residual of `R(x)[𝕂^{[n-1]} + ℙ] = [Ǎ_n … Ǎ_{n+M-1}] Ω_block G`, with the
/// perturbed family and connection matrix taken from the oracle.
pub fn kernel_system_residual<F: Scalar>(
    f: &GaussBorel<F>,
    fp: &GaussBorel<F>,
    omega: &ConnectionMatrix<F>,
    dw: &DwTable<F>,
    pert: &Perturbation<F>,
    n: usize,
    x: &F,
) -> Result<DenseMatrix<F>> {
    let m = dw.window();
    if n < m {
        return Err(GeronimusError::Window { n, needed: m });
    }
    let p = f.p();
    let k = kbb(f, dw, n - 1, x)?;
    let pc = pert.p_columns(x)?;
    let lhs_cols = DenseMatrix::from_fn(p, m, |a, s| k[s][a].clone() + pc[s][a].clone());
    let lhs = pert.r.eval(x).mul(&lhs_cols);
    let acheck = DenseMatrix::from_fn(p, m, |a, t| fp.a_at(n + t, x)[a].clone());
    let oblock = DenseMatrix::from_fn(m, m, |t, u| {
        if u >= t {
            omega.get(n + t, n - m + u)
        } else {
            F::zero()
        }
    });
    let g = dw.block(n - m..n);
    Ok(lhs.sub(&acheck.mul(&oblock).mul(&g)))
}

/// Residual of the mixed-kernel connection
/// `Ǩ_D^{[n-1]}(x,y)R(y) - (R(x)-R(y))/(x-y) - R(x)K_D^{[n-1]}(x,y) + Ǎ Ω_block D`.
#[allow(clippy::too_many_arguments)]
pub fn mixed_kernel_connection_residual<F: Scalar>(
    f: &GaussBorel<F>,
    fp: &GaussBorel<F>,
    mom: &MatrixOfMeasures<F>,
    perturbed: &MatrixOfMeasures<F>,
    r: &MatrixPolynomial<F>,
    omega: &ConnectionMatrix<F>,
    m: usize,
    n: usize,
    x: &F,
    y: &F,
) -> Result<DenseMatrix<F>> {
    if n < m || n == 0 {
        return Err(GeronimusError::Window { n, needed: m.max(1) });
    }
    let p = f.p();
    let (_, kd_check) = kernels::mixed_kernels(fp, perturbed, n - 1, x, y)?;
    let (_, kd) = kernels::mixed_kernels(f, mom, n - 1, x, y)?;
    let dy = cauchy_table(f, mom, y, n, 1)?;
    let ry = r.eval(y);
    let rx = r.eval(x);
    let dxy = x.clone() - y.clone();
    let bivariate = rx.sub(&ry).scale(&(F::one() / dxy));
    let acheck = DenseMatrix::from_fn(p, m, |a, t| fp.a_at(n + t, x)[a].clone());
    let oblock = DenseMatrix::from_fn(m, m, |t, u| {
        if u >= t {
            omega.get(n + t, n - m + u)
        } else {
            F::zero()
        }
    });
    let dblock = DenseMatrix::from_fn(m, p, |t, a| dy.d_at(n - m + t)[a].clone());
    let lhs = kd_check.mul(&ry);
    let rhs = bivariate.add(&rx.mul(&kd)).sub(&acheck.mul(&oblock).mul(&dblock));
    Ok(lhs.sub(&rhs))
}

/// One line of an existence scan.
#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub n: usize,
    pub tau: String,
    pub zero: bool,
    /// `tilde` below the window, `window` from the 𝔻/𝕎 determinants.
    pub source: &'static str,
    /// `ok`, `singular` or `beyond` for the direct factorization.
    pub oracle: &'static str,
}

#[derive(Clone, Debug)]
pub struct ScanReport<F: Scalar> {
    pub taus: Vec<F>,
    pub rows: Vec<ScanRow>,
    /// First vanishing τ index.
    pub first_zero: Option<usize>,
    /// First vanishing pivot of the perturbed moment matrix.
    pub oracle_minor: Option<usize>,
}

impl<F: Scalar> ScanReport<F> {
    /// Orthogonality exists through the scanned range.
    pub fn exists(&self) -> bool {
        self.first_zero.is_none()
    }

    /// τ verdict and factorization agree.
    pub fn consistent(&self) -> bool {
        self.first_zero == self.oracle_minor
    }
}

/// τ̃ below the window, 𝔻/𝕎 determinants from `M` on, checked against a
/// direct factorization of the perturbed moment matrix.
pub fn existence_scan<F: Scalar>(
    mom: &MatrixOfMeasures<F>,
    pert: &Perturbation<F>,
    n_max: usize,
    opts: PerturbOptions,
) -> Result<ScanReport<F>> {
    let m = pert.window();
    let perturbed = pert.apply(mom, opts)?;
    let f = GaussBorel::factorize(mom, n_max + 1)?;
    let size = (n_max + 1).min(m);
    let i_mat = i_matrix(&f, &perturbed, size)?;
    let dw = if n_max >= m { Some(dw_table(&f, mom, pert, n_max)?) } else { None };
    let mut taus = Vec::with_capacity(n_max + 1);
    let mut sources = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n < m {
            taus.push(tau_tilde(&i_mat, n)?);
            sources.push("tilde");
        } else {
            taus.push(dw.as_ref().expect("window table").tau(n)?);
            sources.push("window");
        }
    }
    let scale = taus.iter().fold(F::zero(), |a, t| max_abs_vec(a, std::slice::from_ref(t)));
    let zero: Vec<bool> = taus.iter().map(|t| t.is_negligible(&scale) && (F::is_exact() || t.abs_val() < F::tolerance())).collect();
    let first_zero = zero.iter().position(|&z| z);
    let oracle_minor = match GaussBorel::factorize(&perturbed, n_max) {
        Ok(_) => None,
        Err(MopsError::SingularMinor(k)) => Some(k),
        Err(e) => return Err(e.into()),
    };
    let rows = taus
        .iter()
        .enumerate()
        .map(|(n, t)| ScanRow {
            n,
            tau: t.to_string(),
            zero: zero[n],
            source: sources[n],
            oracle: match oracle_minor {
                Some(k) if n == k => "singular",
                Some(k) if n > k => "beyond",
                _ => "ok",
            },
        })
        .collect();
    Ok(ScanReport { taus, rows, first_zero, oracle_minor })
}

/// Left perturbation `L dμ̌ = dμ`, carried out as the right perturbation of
/// the transposed measure by `Lᵀ`. Polynomials are reported in the left
/// normalization `A = X_{[p]}ᵀ S̄ᵀ` (monic), `B = H⁻¹ S X_{[q]}`.
#[derive(Clone, Debug)]
pub struct LeftGeronimus<F: Scalar> {
    pub transposed: Perturbation<F>,
    pub f_t: GaussBorel<F>,
    pub dw: DwTable<F>,
    pub mom_t: MatrixOfMeasures<F>,
}

impl<F: Scalar> LeftGeronimus<F> {
    pub fn new(mom: &MatrixOfMeasures<F>, l: &MatrixPolynomial<F>, spec: &SpectralData<F>, xi: MassParameters<F>, n_max: usize) -> Result<Self> {
        let transposed = Perturbation::new(l.transpose(), spec.transposed(), xi)?;
        let mom_t = mom.transpose();
        let f_t = GaussBorel::factorize(&mom_t, n_max + 1)?;
        let dw = dw_table(&f_t, &mom_t, &transposed, n_max)?;
        Ok(LeftGeronimus { transposed, f_t, dw, mom_t })
    }

    /// Perturbed measure (not transposed).
    pub fn apply(&self, mom: &MatrixOfMeasures<F>, opts: PerturbOptions) -> Result<MatrixOfMeasures<F>> {
        let t = &self.transposed;
        Ok(perturb_left(mom, &t.r.transpose(), &t.spec.transposed(), &t.xi, opts)?)
    }

    pub fn tau(&self, n: usize) -> Result<F> {
        self.dw.tau(n)
    }

    /// `Ǎ_n` (left normalization), a `p`-vector of polynomials.
    pub fn a_check(&self, n: usize) -> Result<Vec<ScalarPoly<F>>> {
        self.dw.christoffel_b(&self.f_t, n)
    }

    /// `B̌_n(y)` (left normalization), a `q`-vector of values.
    pub fn b_check(&self, n: usize, y: &F) -> Result<Vec<F>> {
        christoffel_a(&self.f_t, &self.dw, &self.transposed, n, y, KbbRoute::Direct)
    }

    /// `ℂ_n - 𝕎_n` from the untransposed family: `v^L C_n(x_i)` and
    /// `v^L L'(x_i) v^R ξ_i A_n(x_i)`, simple eigenvalues only.
    pub fn native_row(&self, f: &GaussBorel<F>, mom: &MatrixOfMeasures<F>, n: usize) -> Result<Vec<F>> {
        let t = &self.transposed;
        if !t.spec.is_simple() {
            return Err(GeronimusError::NotSimple);
        }
        let l = t.r.transpose();
        let dl = l.derivative(1);
        let mut out = Vec::new();
        for (s, e) in t.spec.eigenvalues.iter().enumerate() {
            // left eigenvector of L is the right one of Lᵀ and vice versa
            let vl = &e.right[0].vectors[0];
            let vr = &e.left[0].vectors[0];
            let ct = cauchy_table(f, mom, &e.value, n + 1, 1)?;
            let h = f.h()[n].clone();
            let cn: Vec<F> = ct.c_at(n).into_iter().map(|c| c * h.clone()).collect();
            let cc = dot(vl, &cn);
            let lam = dot(vl, &dl.eval(&e.value).mul_vec(vr));
            let an: Vec<F> = f.a_at(n, &e.value).into_iter().map(|a| a * h.clone()).collect();
            let xi: Vec<F> = (0..f.p()).map(|a| t.xi.coeff(s, a, 0)).collect();
            out.push(cc - lam * dot(&xi, &an));
        }
        Ok(out)
    }
}

fn dot<F: Scalar>(u: &[F], v: &[F]) -> F {
    u.iter().zip(v).fold(F::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
}
