//! Dense row-major matrices over a [`Scalar`].

use std::fmt;
use std::ops::{Index, IndexMut};

use super::scalar::Scalar;
use super::NumericsError;

#[derive(Clone, PartialEq)]
pub struct DenseMatrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

/// Doolittle factors `A = L U` with `L` unit lower triangular.
#[derive(Clone, Debug)]
pub struct LuFactors<F> {
    pub l: DenseMatrix<F>,
    pub u: DenseMatrix<F>,
}

/// Reduced row echelon form together with its pivot columns.
#[derive(Clone, Debug)]
pub struct Echelon<F> {
    pub matrix: DenseMatrix<F>,
    pub pivots: Vec<usize>,
}

impl<F: fmt::Debug> fmt::Debug for DenseMatrix<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| format!("{:?}", self[(i, j)])).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl<F> Index<(usize, usize)> for DenseMatrix<F> {
    type Output = F;
    fn index(&self, (i, j): (usize, usize)) -> &F {
        &self.data[i * self.cols + j]
    }
}

impl<F> IndexMut<(usize, usize)> for DenseMatrix<F> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut F {
        &mut self.data[i * self.cols + j]
    }
}

impl<F: Scalar> DenseMatrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![F::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = F::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<F>>) -> Result<Self, NumericsError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(NumericsError::ShapeMismatch("ragged rows".into()));
        }
        Ok(DenseMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn column_vector(v: &[F]) -> Self {
        DenseMatrix { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> Vec<F> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn column(&self, j: usize) -> Vec<F> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn map(&self, f: impl Fn(&F) -> F) -> Self {
        DenseMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn convert<G: Scalar>(&self, f: impl Fn(&F) -> G) -> DenseMatrix<G> {
        DenseMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> F {
        let mut best = F::zero();
        for x in &self.data {
            let a = x.abs_val();
            if a > best {
                best = a;
            }
        }
        best
    }

    pub fn scale(&self, s: &F) -> Self {
        self.map(|x| x.clone() * s.clone())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, NumericsError> {
        self.check_same(other)?;
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.clone() + b.clone()).collect(),
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, NumericsError> {
        self.check_same(other)?;
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.clone() - b.clone()).collect(),
        })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, NumericsError> {
        if self.cols != other.rows {
            return Err(NumericsError::ShapeMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if b.is_zero() {
                        continue;
                    }
                    out[(i, j)] = out[(i, j)].clone() + a.clone() * b.clone();
                }
            }
        }
        Ok(out)
    }

    /// Sum of two matrices of identical shape.
    ///
    /// # Panics
    /// Panics on a shape mismatch.
    pub fn add(&self, other: &Self) -> Self {
        self.try_add(other).expect("matrix shapes must agree")
    }

    /// # Panics
    /// Panics on a shape mismatch.
    pub fn sub(&self, other: &Self) -> Self {
        self.try_sub(other).expect("matrix shapes must agree")
    }

    /// # Panics
    /// Panics if inner dimensions differ.
    pub fn mul(&self, other: &Self) -> Self {
        self.try_mul(other).expect("inner dimensions must agree")
    }

    pub fn mul_vec(&self, v: &[F]) -> Vec<F> {
        assert_eq!(self.cols, v.len(), "vector length must match columns");
        (0..self.rows)
            .map(|i| {
                let mut acc = F::zero();
                for (j, x) in v.iter().enumerate() {
                    acc = acc + self[(i, j)].clone() * x.clone();
                }
                acc
            })
            .collect()
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[F]) -> Vec<F> {
        assert_eq!(self.rows, v.len(), "vector length must match rows");
        (0..self.cols)
            .map(|j| {
                let mut acc = F::zero();
                for (i, x) in v.iter().enumerate() {
                    acc = acc + x.clone() * self[(i, j)].clone();
                }
                acc
            })
            .collect()
    }

    pub fn submatrix(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        Self::from_fn(r1 - r0, c1 - c0, |i, j| self[(r0 + i, c0 + j)].clone())
    }

    /// Leading principal `n x n` block.
    pub fn leading(&self, n: usize) -> Self {
        self.submatrix(0, n, 0, n)
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), self.cols, |i, j| self[(idx[i], j)].clone())
    }

    fn check_same(&self, other: &Self) -> Result<(), NumericsError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(NumericsError::ShapeMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    /// Doolittle factorization without pivoting.
    ///
    /// Fails with [`NumericsError::SingularMinor`] naming the first vanishing
    /// pivot (0-based), which is the first singular leading principal minor.
    pub fn lu_no_pivot(&self) -> Result<LuFactors<F>, NumericsError> {
        if !self.is_square() {
            return Err(NumericsError::ShapeMismatch("LU needs a square matrix".into()));
        }
        let n = self.rows;
        let scale = self.max_abs();
        let mut u = self.clone();
        let mut l = Self::identity(n);
        for k in 0..n {
            let pivot = u[(k, k)].clone();
            if pivot.is_negligible(&scale) {
                return Err(NumericsError::SingularMinor { index: k });
            }
            for i in k + 1..n {
                if u[(i, k)].is_zero() {
                    continue;
                }
                let f = u[(i, k)].clone() / pivot.clone();
                for j in k..n {
                    let t = f.clone() * u[(k, j)].clone();
                    u[(i, j)] = u[(i, j)].clone() - t;
                }
                u[(i, k)] = F::zero();
                l[(i, k)] = f;
            }
        }
        Ok(LuFactors { l, u })
    }

    /// Determinant by Gaussian elimination with row pivoting.
    pub fn determinant(&self) -> Result<F, NumericsError> {
        if !self.is_square() {
            return Err(NumericsError::ShapeMismatch("determinant needs a square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut det = F::one();
        for k in 0..n {
            let Some(p) = choose_pivot(&a, k, k) else {
                return Ok(F::zero());
            };
            if p != k {
                a.swap_rows(p, k);
                det = -det;
            }
            let pivot = a[(k, k)].clone();
            det = det * pivot.clone();
            for i in k + 1..n {
                if a[(i, k)].is_zero() {
                    continue;
                }
                let f = a[(i, k)].clone() / pivot.clone();
                for j in k..n {
                    let t = f.clone() * a[(k, j)].clone();
                    a[(i, j)] = a[(i, j)].clone() - t;
                }
            }
        }
        Ok(det)
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Solves `A X = B` for square nonsingular `A`.
    pub fn solve(&self, rhs: &Self) -> Result<Self, NumericsError> {
        if !self.is_square() || rhs.rows != self.rows {
            return Err(NumericsError::ShapeMismatch("solve needs square A and matching B".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut b = rhs.clone();
        for k in 0..n {
            let p = choose_pivot(&a, k, k).ok_or(NumericsError::Singular)?;
            a.swap_rows(p, k);
            b.swap_rows(p, k);
            let pivot = a[(k, k)].clone();
            for i in k + 1..n {
                if a[(i, k)].is_zero() {
                    continue;
                }
                let f = a[(i, k)].clone() / pivot.clone();
                for j in k..n {
                    let t = f.clone() * a[(k, j)].clone();
                    a[(i, j)] = a[(i, j)].clone() - t;
                }
                for j in 0..b.cols {
                    let t = f.clone() * b[(k, j)].clone();
                    b[(i, j)] = b[(i, j)].clone() - t;
                }
            }
        }
        let mut x = Self::zeros(n, b.cols);
        for j in 0..b.cols {
            for i in (0..n).rev() {
                let mut acc = b[(i, j)].clone();
                for k in i + 1..n {
                    acc = acc - a[(i, k)].clone() * x[(k, j)].clone();
                }
                x[(i, j)] = acc / a[(i, i)].clone();
            }
        }
        Ok(x)
    }

    /// Solves the row system `x A = b`.
    pub fn solve_left(&self, b: &[F]) -> Result<Vec<F>, NumericsError> {
        let x = self.transpose().solve(&Self::column_vector(b))?;
        Ok(x.column(0))
    }

    pub fn inverse(&self) -> Result<Self, NumericsError> {
        self.solve(&Self::identity(self.rows))
    }

    /// Inverse of a lower triangular matrix by forward substitution.
    pub fn inverse_lower(&self) -> Result<Self, NumericsError> {
        let n = self.rows;
        let mut x = Self::zeros(n, n);
        for j in 0..n {
            for i in j..n {
                let mut acc = if i == j { F::one() } else { F::zero() };
                for k in j..i {
                    acc = acc - self[(i, k)].clone() * x[(k, j)].clone();
                }
                if self[(i, i)].is_zero() {
                    return Err(NumericsError::Singular);
                }
                x[(i, j)] = acc / self[(i, i)].clone();
            }
        }
        Ok(x)
    }

    /// Inverse of an upper triangular matrix by back substitution.
    pub fn inverse_upper(&self) -> Result<Self, NumericsError> {
        Ok(self.transpose().inverse_lower()?.transpose())
    }

    /// Reduced row echelon form; float pivots below tolerance count as zero.
    pub fn rref(&self) -> Echelon<F> {
        let mut a = self.clone();
        let scale = self.max_abs();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..a.cols {
            if r == a.rows {
                break;
            }
            let Some(p) = choose_pivot_scaled(&a, r, c, &scale) else {
                for i in r..a.rows {
                    a[(i, c)] = F::zero();
                }
                continue;
            };
            a.swap_rows(p, r);
            let pivot = a[(r, c)].clone();
            for j in c..a.cols {
                a[(r, j)] = a[(r, j)].clone() / pivot.clone();
            }
            for i in 0..a.rows {
                if i == r || a[(i, c)].is_zero() {
                    continue;
                }
                let f = a[(i, c)].clone();
                for j in c..a.cols {
                    let t = f.clone() * a[(r, j)].clone();
                    a[(i, j)] = a[(i, j)].clone() - t;
                }
                a[(i, c)] = F::zero();
            }
            pivots.push(c);
            r += 1;
        }
        Echelon { matrix: a, pivots }
    }

    pub fn rank(&self) -> usize {
        self.rref().pivots.len()
    }

    /// Kernel basis read off the reduced row echelon form: one vector per
    /// free column, carrying a `1` in that column.
    pub fn nullspace(&self) -> Vec<Vec<F>> {
        let Echelon { matrix, pivots } = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![F::zero(); self.cols];
                v[f] = F::one();
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = -matrix[(row, f)].clone();
                }
                v
            })
            .collect()
    }

    /// Particular solution of `A x = b` with free variables set to zero.
    pub fn solve_particular(&self, b: &[F]) -> Result<Vec<F>, NumericsError> {
        let aug = Self::from_fn(self.rows, self.cols + 1, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                b[i].clone()
            }
        });
        let Echelon { matrix, pivots } = aug.rref();
        if pivots.contains(&self.cols) {
            return Err(NumericsError::Inconsistent);
        }
        let mut x = vec![F::zero(); self.cols];
        for (row, &pc) in pivots.iter().enumerate() {
            x[pc] = matrix[(row, self.cols)].clone();
        }
        Ok(x)
    }
}

fn choose_pivot<F: Scalar>(a: &DenseMatrix<F>, start: usize, col: usize) -> Option<usize> {
    let scale = a.max_abs();
    choose_pivot_scaled(a, start, col, &scale)
}

fn choose_pivot_scaled<F: Scalar>(
    a: &DenseMatrix<F>,
    start: usize,
    col: usize,
    scale: &F,
) -> Option<usize> {
    if F::is_exact() {
        return (start..a.rows).find(|&i| !a[(i, col)].is_zero());
    }
    let mut best: Option<(usize, F)> = None;
    for i in start..a.rows {
        let v = a[(i, col)].abs_val();
        if best.as_ref().is_none_or(|(_, b)| v > *b) {
            best = Some((i, v));
        }
    }
    match best {
        Some((i, v)) if !v.is_negligible(scale) => Some(i),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::scalar::ratio;
    use num::BigRational;

    fn q(rows: &[&[i64]]) -> DenseMatrix<BigRational> {
        DenseMatrix::from_rows(
            rows.iter().map(|r| r.iter().map(|&x| ratio(x, 1)).collect()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn lu_reconstructs_and_reports_singular_minor() {
        let a = q(&[&[2, 1, 1], &[4, 3, 3], &[8, 7, 9]]);
        let f = a.lu_no_pivot().unwrap();
        assert_eq!(f.l.mul(&f.u), a);
        let b = q(&[&[1, 1], &[1, 1]]);
        assert!(matches!(b.lu_no_pivot(), Err(NumericsError::SingularMinor { index: 1 })));
        let c = q(&[&[0, 1], &[1, 0]]);
        assert!(matches!(c.lu_no_pivot(), Err(NumericsError::SingularMinor { index: 0 })));
    }

    #[test]
    fn determinant_handles_permutations() {
        let c = q(&[&[0, 1], &[1, 0]]);
        assert_eq!(c.determinant().unwrap(), ratio(-1, 1));
        let h = DenseMatrix::from_fn(4, 4, |i, j| ratio(1, (i + j + 1) as i64));
        assert_eq!(h.determinant().unwrap(), ratio(1, 6_048_000));
    }

    #[test]
    fn nullspace_and_particular_solutions() {
        let a = q(&[&[0, -1], &[0, 0]]);
        assert_eq!(a.nullspace(), vec![vec![ratio(1, 1), ratio(0, 1)]]);
        let x = a.solve_particular(&[ratio(-1, 1), ratio(0, 1)]).unwrap();
        assert_eq!(x, vec![ratio(0, 1), ratio(1, 1)]);
        assert!(a.solve_particular(&[ratio(0, 1), ratio(1, 1)]).is_err());
    }

    #[test]
    fn triangular_inverses() {
        let l = q(&[&[1, 0, 0], &[2, 1, 0], &[3, 4, 1]]);
        assert_eq!(l.mul(&l.inverse_lower().unwrap()), DenseMatrix::identity(3));
        let u = l.transpose();
        assert_eq!(u.mul(&u.inverse_upper().unwrap()), DenseMatrix::identity(3));
    }
}
