//! Christoffel–Darboux kernels, Cauchy transforms and Markov–Stieltjes functions.

use thiserror::Error;

use crate::matpoly::{MatPolyError, MatrixPolynomial};
use crate::measures::{Location, MatrixOfMeasures, MeasureError};
use crate::mops::{GaussBorel, MopsError, RecurrenceMatrix};
use crate::numerics::{DenseMatrix, NumericsError, Scalar, ScalarPoly};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("{0} lies inside the support")]
    OnSupport(String),
    #[error("projection needs n >= {needed}, got {n}")]
    ThresholdTooSmall { n: usize, needed: usize },
    #[error("index {index} needs {needed} polynomials, factorization has {available}")]
    SlackExceeded { index: usize, needed: usize, available: usize },
    #[error("{0} is an eigenvalue of the perturbation")]
    EigenvalueAtZ(String),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Mops(#[from] MopsError),
    #[error(transparent)]
    MatPoly(#[from] MatPolyError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

type Result<T> = std::result::Result<T, KernelError>;

fn need<F: Scalar>(f: &GaussBorel<F>, index: usize, needed: usize) -> Result<()> {
    if needed > f.len() {
        return Err(KernelError::SlackExceeded { index, needed, available: f.len() });
    }
    Ok(())
}

/// `K^{[n]}(x, y) = Σ_{i<=n} A_i(x) B_i(y)`, a `p × q` matrix.
pub fn cd_kernel<F: Scalar>(f: &GaussBorel<F>, n: usize, x: &F, y: &F) -> Result<DenseMatrix<F>> {
    need(f, n, n + 1)?;
    let mut k = DenseMatrix::zeros(f.p(), f.q());
    for i in 0..=n {
        k = k.add(&outer(&f.a_at(i, x), &f.b_at(i, y)));
    }
    Ok(k)
}

fn outer<F: Scalar>(u: &[F], v: &[F]) -> DenseMatrix<F> {
    DenseMatrix::from_fn(u.len(), v.len(), |i, j| u[i].clone() * v[j].clone())
}

/// `𝒳^{[>n]} 𝒯^{[>n,n]} 𝒴^{[n]} - 𝒳^{[n]} 𝒯^{[n,>n]} 𝒴^{[>n]}` for column
/// data `col(i)` and row data `row(i)` indexed like `A_i` and `B_i`.
fn cd_boundary<F: Scalar>(
    t: &RecurrenceMatrix<F>,
    n: usize,
    col: impl Fn(usize) -> Vec<F>,
    row: impl Fn(usize) -> Vec<F>,
) -> DenseMatrix<F> {
    let (p, q) = (t.p, t.q);
    let n = n as isize;
    let mut acc: Option<DenseMatrix<F>> = None;
    let mut add = |m: DenseMatrix<F>, sign: bool| {
        let m = if sign { m } else { m.scale(&-F::one()) };
        acc = Some(match acc.take() {
            None => m,
            Some(a) => a.add(&m),
        });
    };
    for i in 0..p as isize {
        for j in 0..p as isize {
            let (r, c) = (n + 1 + i, n + 1 - p as isize + j);
            if c < 0 {
                continue;
            }
            let tv = t.get(r as usize, c as usize);
            if !tv.is_zero() {
                add(outer(&col(r as usize), &row(c as usize)).scale(&tv), true);
            }
        }
    }
    for i in 0..q as isize {
        for j in 0..q as isize {
            let (r, c) = (n + 1 - q as isize + i, n + 1 + j);
            if r < 0 {
                continue;
            }
            let tv = t.get(r as usize, c as usize);
            if !tv.is_zero() {
                add(outer(&col(r as usize), &row(c as usize)).scale(&tv), false);
            }
        }
    }
    acc.unwrap_or_else(|| DenseMatrix::zeros(0, 0))
}

fn recurrence_slack<F: Scalar>(f: &GaussBorel<F>, n: usize) -> Result<()> {
    need(f, n, n + f.p() + f.q() + 1)
}

/// Corner-block combination with the recurrence matrix, public for the
/// kernel reductions of the perturbation formulas.
pub fn cd_boundary_terms<F: Scalar>(
    f: &GaussBorel<F>,
    t: &RecurrenceMatrix<F>,
    n: usize,
    col: impl Fn(usize) -> Vec<F>,
    row: impl Fn(usize) -> Vec<F>,
) -> Result<DenseMatrix<F>> {
    recurrence_slack(f, n)?;
    Ok(cd_boundary(t, n, col, row))
}

fn sub_vec<F: Scalar>(u: Vec<F>, v: Vec<F>) -> Vec<F> {
    u.into_iter().zip(v).map(|(a, b)| a - b).collect()
}

/// `(x-y) K^{[n]}(x,y)` minus the corner-block right-hand side.
pub fn cd_identity_residual<F: Scalar>(f: &GaussBorel<F>, t: &RecurrenceMatrix<F>, n: usize, x: &F, y: &F) -> Result<DenseMatrix<F>> {
    recurrence_slack(f, n)?;
    let lhs = cd_kernel(f, n, x, y)?.scale(&(x.clone() - y.clone()));
    let rhs = cd_boundary(t, n, |i| f.a_at(i, x), |i| f.b_at(i, y));
    Ok(lhs.sub(&rhs))
}

/// Cauchy transforms `C_n(z) = ∫ dμ A_n / (z - x)` (q-vectors) and
/// `D_n(z) = ∫ B_n dμ / (z - x)` (p-vectors), with Taylor coefficients in `z`.
#[derive(Clone, Debug)]
pub struct CauchyTable<F: Scalar> {
    pub z: F,
    /// `c[l][n][b]`, the `l`-th Taylor coefficient of `C_n^{(b)}` at `z`.
    pub c: Vec<Vec<Vec<F>>>,
    /// `d[l][n][a]`, the `l`-th Taylor coefficient of `D_n^{(a)}` at `z`.
    pub d: Vec<Vec<Vec<F>>>,
}

impl<F: Scalar> CauchyTable<F> {
    pub fn c_at(&self, n: usize) -> Vec<F> {
        self.c[0][n].clone()
    }

    pub fn d_at(&self, n: usize) -> Vec<F> {
        self.d[0][n].clone()
    }
}

/// Exact through pole-moment recurrences; `order` Taylor coefficients.
pub fn cauchy_table<F: Scalar>(
    f: &GaussBorel<F>,
    mom: &MatrixOfMeasures<F>,
    z: &F,
    count: usize,
    order: usize,
) -> Result<CauchyTable<F>> {
    need(f, count.saturating_sub(1), count)?;
    if mom.location(z) == Location::Interior {
        return Err(KernelError::OnSupport(z.to_string()));
    }
    let (p, q) = (f.p(), f.q());
    let kmax = count.div_ceil(q.min(p)) + 1;
    let mut tables = Vec::with_capacity(q);
    for b in 0..q {
        let mut row = Vec::with_capacity(p);
        for a in 0..p {
            row.push(mom.component(b, a).pole_moments(z, order, kmax)?);
        }
        tables.push(row);
    }
    let contract = |poly: &ScalarPoly<F>, h: &[F]| -> F {
        poly.coeffs().iter().zip(h).fold(F::zero(), |acc, (c, v)| acc + c.clone() * v.clone())
    };
    let mut c = Vec::with_capacity(order);
    let mut d = Vec::with_capacity(order);
    for l in 0..order {
        let mut cl = Vec::with_capacity(count);
        let mut dl = Vec::with_capacity(count);
        for n in 0..count {
            let cn = (0..q)
                .map(|b| {
                    -(0..p).fold(F::zero(), |acc, a| acc + contract(&f.a(n)[a], &tables[b][a][l + 1]))
                })
                .collect();
            let dn = (0..p)
                .map(|a| {
                    -(0..q).fold(F::zero(), |acc, b| acc + contract(&f.b(n)[b], &tables[b][a][l + 1]))
                })
                .collect();
            cl.push(cn);
            dl.push(dn);
        }
        c.push(cl);
        d.push(dl);
    }
    Ok(CauchyTable { z: z.clone(), c, d })
}

/// Taylor coefficients `D_n^{[l],(a)}(z)`, `l < order`, `n < count`, only
/// for the columns flagged in `columns`; the others are left at zero.
pub fn cauchy_d_jets<F: Scalar>(
    f: &GaussBorel<F>,
    mom: &MatrixOfMeasures<F>,
    z: &F,
    count: usize,
    order: usize,
    columns: &[bool],
) -> Result<Vec<Vec<Vec<F>>>> {
    need(f, count.saturating_sub(1), count)?;
    let (p, q) = (f.p(), f.q());
    let kmax = count / q + 1;
    let mut out = vec![vec![vec![F::zero(); p]; count]; order];
    for a in (0..p).filter(|&a| columns[a]) {
        for b in 0..q {
            let comp = mom.component(b, a);
            if comp.is_zero() {
                continue;
            }
            if comp.location(z) == Location::Interior {
                return Err(KernelError::OnSupport(z.to_string()));
            }
            let h = comp.pole_moments(z, order, kmax)?;
            for (l, slab) in out.iter_mut().enumerate() {
                for (n, row) in slab.iter_mut().enumerate() {
                    let s = f.b(n)[b]
                        .coeffs()
                        .iter()
                        .zip(&h[l + 1])
                        .fold(F::zero(), |acc, (c, v)| acc + c.clone() * v.clone());
                    row[a] = row[a].clone() - s;
                }
            }
        }
    }
    Ok(out)
}

/// Truncated expansions `C(z) = z⁻¹ X_[q]ᵀ(z⁻¹) S⁻¹` and
/// `D(z) = z⁻¹ H S̄⁻ᵀ X_[p](z⁻¹)` for `|z|` beyond the support; only rows
/// and columns inside the factorization are summed.
pub fn cauchy_series<F: Scalar>(f: &GaussBorel<F>, n: usize, z: &F) -> (Vec<F>, Vec<F>) {
    let dim = f.len();
    let inv = F::one() / z.clone();
    let s_inv = f.s_inverse();
    let mut c = vec![F::zero(); f.q()];
    for i in n..dim {
        let w = inv.powi(i / f.q() + 1);
        c[i % f.q()] = c[i % f.q()].clone() + w * s_inv[(i, n)].clone();
    }
    let sbar_inv_t = f.sbar().inverse_lower().expect("unitriangular").transpose();
    let mut d = vec![F::zero(); f.p()];
    for j in n..dim {
        let w = inv.powi(j / f.p() + 1);
        d[j % f.p()] = d[j % f.p()].clone() + w * f.h()[n].clone() * sbar_inv_t[(n, j)].clone();
    }
    (c, d)
}

/// `K_C^{[n]}(x,y) = C^{[n]}(x) B^{[n]}(y)` (q × q) and
/// `K_D^{[n]}(x,y) = A^{[n]}(x) D^{[n]}(y)` (p × p); `x` is the transform
/// argument of `K_C`, `y` that of `K_D`.
pub fn mixed_kernels<F: Scalar>(
    f: &GaussBorel<F>,
    mom: &MatrixOfMeasures<F>,
    n: usize,
    x: &F,
    y: &F,
) -> Result<(DenseMatrix<F>, DenseMatrix<F>)> {
    let cx = cauchy_table(f, mom, x, n + 1, 1)?;
    let dy = cauchy_table(f, mom, y, n + 1, 1)?;
    let mut kc = DenseMatrix::zeros(f.q(), f.q());
    let mut kd = DenseMatrix::zeros(f.p(), f.p());
    for i in 0..=n {
        kc = kc.add(&outer(&cx.c_at(i), &f.b_at(i, y)));
        kd = kd.add(&outer(&f.a_at(i, x), &dy.d_at(i)));
    }
    Ok((kc, kd))
}

/// Residuals of both mixed Christoffel–Darboux formulas; `x` and `y`
/// must both be off the support.
pub fn mixed_cd_identity_residual<F: Scalar>(
    f: &GaussBorel<F>,
    mom: &MatrixOfMeasures<F>,
    t: &RecurrenceMatrix<F>,
    n: usize,
    x: &F,
    y: &F,
) -> Result<(DenseMatrix<F>, DenseMatrix<F>)> {
    recurrence_slack(f, n)?;
    let count = n + f.p().max(f.q()) + 1;
    let tx = cauchy_table(f, mom, x, count, 1)?;
    let ty = cauchy_table(f, mom, y, count, 1)?;
    let (kc, kd) = mixed_kernels(f, mom, n, x, y)?;
    let dxy = x.clone() - y.clone();
    let rc = cd_boundary(t, n, |i| sub_vec(tx.c_at(i), ty.c_at(i)), |i| f.b_at(i, y));
    let rd = cd_boundary(t, n, |i| f.a_at(i, x), |i| sub_vec(tx.d_at(i), ty.d_at(i)));
    Ok((kc.scale(&dxy).sub(&rc), kd.scale(&dxy).add(&rd)))
}

/// Smallest `n` for which the projection property is guaranteed:
/// `N p + p - 1`, lowered by `r` when the leading coefficient is
/// `[[0, I_{p-r}], [0, 0]]`.
pub fn projection_threshold<F: Scalar>(poly: &MatrixPolynomial<F>) -> usize {
    let p = poly.size();
    let n = poly.degree();
    let top = poly.coeff(n);
    let r = p - top.rank();
    let patterned = (0..p).all(|i| {
        (0..p).all(|j| {
            let want = if i < p - r && j == i + r { F::one() } else { F::zero() };
            top[(i, j)] == want
        })
    });
    n * p + p - 1 - if patterned { r } else { 0 }
}

/// `∫ K^{[n]}(x,t) dμ(t) P(t)` as a matrix polynomial in `x`.
pub fn projection_apply<F: Scalar>(
    f: &GaussBorel<F>,
    mom: &MatrixOfMeasures<F>,
    n: usize,
    poly: &MatrixPolynomial<F>,
) -> Result<MatrixPolynomial<F>> {
    let needed = projection_threshold(poly);
    if n < needed {
        return Err(KernelError::ThresholdTooSmall { n, needed });
    }
    projection_apply_unchecked(f, mom, n, poly)
}

/// The same contraction without the threshold guard.
pub fn projection_apply_unchecked<F: Scalar>(
    f: &GaussBorel<F>,
    mom: &MatrixOfMeasures<F>,
    n: usize,
    poly: &MatrixPolynomial<F>,
) -> Result<MatrixPolynomial<F>> {
    need(f, n, n + 1)?;
    let p = f.p();
    let mut entries = vec![vec![ScalarPoly::zero(); p]; p];
    for i in 0..=n {
        let mut w = vec![F::zero(); p];
        for (a, wa) in w.iter_mut().enumerate() {
            for (b, bp) in f.b(i).iter().enumerate() {
                for c in 0..p {
                    let pc = poly.entry(c, a);
                    for (j, x) in bp.coeffs().iter().enumerate() {
                        for (k, y) in pc.coeffs().iter().enumerate() {
                            if !x.is_zero() && !y.is_zero() {
                                *wa = wa.clone() + x.clone() * y.clone() * mom.moment(b, c, j + k)?;
                            }
                        }
                    }
                }
            }
        }
        for (row, ap) in entries.iter_mut().zip(f.a(i)) {
            for (cell, wa) in row.iter_mut().zip(&w) {
                *cell = cell.add(&ap.scale(wa));
            }
        }
    }
    Ok(MatrixPolynomial::from_entries(&entries)?)
}

/// `F(z) = ∫ dμ(x) / (z - x)`.
pub fn stieltjes_f<F: Scalar>(mom: &MatrixOfMeasures<F>, z: &F) -> Result<DenseMatrix<F>> {
    if mom.location(z) == Location::Interior {
        return Err(KernelError::OnSupport(z.to_string()));
    }
    Ok(mom.stieltjes(z)?)
}

/// Coefficients `S_k = ∫ dμ̌ (R_{k+1} + x R_{k+2} + ... + x^{N-k-1} R_N)`.
pub fn stieltjes_s_coeffs<F: Scalar>(pert: &MatrixOfMeasures<F>, r: &MatrixPolynomial<F>) -> Result<Vec<DenseMatrix<F>>> {
    let (q, p) = (pert.q(), pert.p());
    let nn = r.degree();
    let mut out = Vec::with_capacity(nn);
    for k in 0..nn {
        let mut s = DenseMatrix::zeros(q, p);
        for l in k + 1..=nn {
            let rl = r.coeff(l);
            let mut mom = DenseMatrix::zeros(q, p);
            for b in 0..q {
                for a in 0..p {
                    mom[(b, a)] = pert.moment(b, a, l - 1 - k)?;
                }
            }
            s = s.add(&mom.mul(&rl));
        }
        out.push(s);
    }
    Ok(out)
}

/// `F̌(z) R(z) - F(z) - S(z)`.
pub fn stieltjes_residual<F: Scalar>(
    mom: &MatrixOfMeasures<F>,
    pert: &MatrixOfMeasures<F>,
    r: &MatrixPolynomial<F>,
    z: &F,
) -> Result<DenseMatrix<F>> {
    if r.determinant_poly().eval(z).is_zero() {
        return Err(KernelError::EigenvalueAtZ(z.to_string()));
    }
    let fz = stieltjes_f(mom, z)?;
    let fcheck = stieltjes_f(pert, z)?;
    let mut s = DenseMatrix::zeros(mom.q(), mom.p());
    for (k, sk) in stieltjes_s_coeffs(pert, r)?.iter().enumerate() {
        s = s.add(&sk.scale(&z.powi(k)));
    }
    Ok(fcheck.mul(&r.eval(z)).sub(&fz).sub(&s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{Component, MomentGenerator};
    use crate::numerics::scalar::ratio;
    use num::BigRational;

    type Q = BigRational;

    fn uniform() -> MatrixOfMeasures<Q> {
        MatrixOfMeasures::scalar(MomentGenerator::uniform())
    }

    #[test]
    fn kernel_of_shifted_legendre() {
        let mom = uniform();
        let f = GaussBorel::factorize(&mom, 6).unwrap();
        let (x, y) = (ratio(1, 3), ratio(-2, 5));
        assert_eq!(cd_kernel(&f, 0, &x, &y).unwrap()[(0, 0)], ratio(1, 1));
        let want = ratio(1, 1) + ratio(12, 1) * (x.clone() - ratio(1, 2)) * (y.clone() - ratio(1, 2));
        assert_eq!(cd_kernel(&f, 1, &x, &y).unwrap()[(0, 0)], want);
        let t = f.recurrence_matrix();
        assert!(cd_identity_residual(&f, &t, 1, &x, &y).unwrap().is_zero());
        assert!(cd_identity_residual(&f, &t, 3, &x, &x).unwrap().is_zero());
    }

    #[test]
    fn projection_reproduces_quadratics() {
        let mom = uniform();
        let f = GaussBorel::factorize(&mom, 6).unwrap();
        let p = MatrixPolynomial::new(vec![
            DenseMatrix::from_rows(vec![vec![ratio(0, 1)]]).unwrap(),
            DenseMatrix::from_rows(vec![vec![ratio(0, 1)]]).unwrap(),
            DenseMatrix::from_rows(vec![vec![ratio(1, 1)]]).unwrap(),
        ])
        .unwrap();
        assert_eq!(projection_threshold(&p), 2);
        assert_eq!(projection_apply(&f, &mom, 2, &p).unwrap(), p);
        assert!(matches!(projection_apply(&f, &mom, 1, &p), Err(KernelError::ThresholdTooSmall { .. })));
        assert_ne!(projection_apply_unchecked(&f, &mom, 1, &p).unwrap(), p);
    }

    #[test]
    fn cauchy_transforms_in_float() {
        let mom = MatrixOfMeasures::scalar(MomentGenerator::<f64>::uniform());
        let f = GaussBorel::factorize(&mom, 8).unwrap();
        let t = cauchy_table(&f, &mom, &2.0, 3, 1).unwrap();
        assert!((t.d_at(0)[0] - std::f64::consts::LN_2).abs() < 1e-13);
        let z = 40.0;
        let exact = cauchy_table(&f, &mom, &z, 2, 1).unwrap();
        let (c, d) = cauchy_series(&f, 1, &z);
        assert!((c[0] - exact.c_at(1)[0]).abs() < 1e-12);
        assert!((d[0] - exact.d_at(1)[0]).abs() < 1e-12);
    }

    #[test]
    fn mixed_identities_with_formal_seeds() {
        let g1 = MomentGenerator::<Q>::jacobi(ratio(1, 2), ratio(1, 1), ratio(1, 1)).unwrap();
        let g2 = MomentGenerator::<Q>::jacobi(ratio(1, 3), ratio(1, 1), ratio(1, 1)).unwrap();
        let (x, y) = (ratio(3, 1), ratio(-2, 1));
        let seed = |g: &std::sync::Arc<MomentGenerator<Q>>, s: i64| {
            MomentGenerator::seeded(g.clone(), vec![(x.clone(), 1, ratio(s, 7)), (y.clone(), 1, ratio(-s, 11))])
        };
        let mom = MatrixOfMeasures::new(vec![vec![
            Component::from_generator(seed(&g1, 2)),
            Component::from_generator(seed(&g2, 5)),
        ]])
        .unwrap();
        let f = GaussBorel::factorize(&mom, 12).unwrap();
        let t = f.recurrence_matrix();
        for n in 1..5 {
            let (rc, rd) = mixed_cd_identity_residual(&f, &mom, &t, n, &x, &y).unwrap();
            assert!(rc.is_zero() && rd.is_zero(), "n = {n}");
        }
    }

    #[test]
    fn stieltjes_of_a_point_mass() {
        let mom = MatrixOfMeasures::scalar(MomentGenerator::<Q>::discrete(vec![(ratio(1, 2), ratio(3, 1))]));
        assert_eq!(stieltjes_f(&mom, &ratio(2, 1)).unwrap()[(0, 0)], ratio(2, 1));
    }
}
