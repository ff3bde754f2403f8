//! Polynomial roots through the eigenvalues of the companion matrix.

use num_complex::Complex;
use num_traits::{One, Zero};

use super::poly::ScalarPoly;
use super::scalar::{FloatScalar, Scalar};
use super::NumericsError;

/// A root and the number of computed eigenvalues merged into it.
#[derive(Clone, Debug)]
pub struct Root<F> {
    pub value: Complex<F>,
    pub multiplicity: usize,
}

type C<F> = Complex<F>;

fn cabs<F: FloatScalar>(z: &C<F>) -> F {
    (z.re.clone() * z.re.clone() + z.im.clone() * z.im.clone()).sqrt()
}

fn cconj<F: FloatScalar>(z: &C<F>) -> C<F> {
    C::new(z.re.clone(), -z.im.clone())
}

fn csqrt<F: FloatScalar>(z: &C<F>) -> C<F> {
    let r = cabs(z);
    if r.is_zero() {
        return C::zero();
    }
    let two = F::from_i64(2);
    let re = ((r.clone() + z.re.clone()) / two.clone()).abs_val().sqrt();
    let im = ((r - z.re.clone()) / two).abs_val().sqrt();
    let im = if z.im < F::zero() { -im } else { im };
    C::new(re, im)
}

fn cscale<F: FloatScalar>(z: &C<F>, s: &F) -> C<F> {
    C::new(z.re.clone() * s.clone(), z.im.clone() * s.clone())
}

/// Default relative clustering radius, `2^(-P/3)`.
pub fn default_cluster_radius<F: FloatScalar>() -> F {
    (F::from_i64(2).ln() * F::from_ratio(-(F::precision_bits() as i64), 3)).exp()
}

/// All complex roots of `p`, polished by Newton steps and grouped into
/// clusters of radius [`default_cluster_radius`], whose means are returned.
pub fn poly_roots<F: FloatScalar>(p: &ScalarPoly<F>) -> Result<Vec<Root<F>>, NumericsError> {
    poly_roots_clustered(p, &default_cluster_radius())
}

/// [`poly_roots`] with an explicit relative clustering radius.
pub fn poly_roots_clustered<F: FloatScalar>(p: &ScalarPoly<F>, radius: &F) -> Result<Vec<Root<F>>, NumericsError> {
    let Some(n) = p.degree() else {
        return Err(NumericsError::Domain("zero polynomial has no finite root set".into()));
    };
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = p.leading();
    let monic: Vec<F> = p.coeffs().iter().map(|c| c.clone() / lead.clone()).collect();
    let mut h: Vec<Vec<C<F>>> = vec![vec![C::zero(); n]; n];
    for j in 0..n {
        h[0][j] = C::new(-monic[n - 1 - j].clone(), F::zero());
    }
    for i in 1..n {
        h[i][i - 1] = C::one();
    }
    let eig = hessenberg_eigenvalues(h)?;
    let coeffs: Vec<C<F>> = p.coeffs().iter().map(|c| C::new(c.clone(), F::zero())).collect();
    let dcoeffs: Vec<C<F>> =
        p.derivative().coeffs().iter().map(|c| C::new(c.clone(), F::zero())).collect();
    let polished: Vec<C<F>> = eig.into_iter().map(|z| newton(&coeffs, &dcoeffs, z)).collect();
    Ok(cluster(polished, radius))
}

fn horner<F: FloatScalar>(c: &[C<F>], z: &C<F>) -> C<F> {
    let mut acc = C::zero();
    for a in c.iter().rev() {
        acc = acc * z.clone() + a.clone();
    }
    acc
}

fn newton<F: FloatScalar>(c: &[C<F>], d: &[C<F>], mut z: C<F>) -> C<F> {
    let mut best = cabs(&horner(c, &z));
    for _ in 0..60 {
        let dv = horner(d, &z);
        if cabs(&dv).is_zero() {
            break;
        }
        let step = horner(c, &z) / dv;
        let cand = z.clone() - step.clone();
        let val = cabs(&horner(c, &cand));
        if val < best {
            best = val;
            z = cand;
        } else {
            break;
        }
        let mag = cabs(&z);
        let mag = if mag < F::one() { F::one() } else { mag };
        if cabs(&step) <= F::epsilon() * mag {
            break;
        }
    }
    z
}

fn cluster<F: FloatScalar>(roots: Vec<C<F>>, radius: &F) -> Vec<Root<F>> {
    let mut used = vec![false; roots.len()];
    let mut out = Vec::new();
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let mut members = vec![roots[i].clone()];
        let mag = cabs(&roots[i]);
        let tol = radius.clone() * if mag < F::one() { F::one() } else { mag };
        for j in i + 1..roots.len() {
            if !used[j] && cabs(&(roots[j].clone() - roots[i].clone())) <= tol {
                used[j] = true;
                members.push(roots[j].clone());
            }
        }
        let k = members.len();
        let sum = members.into_iter().fold(C::zero(), |a, b| a + b);
        out.push(Root { value: cscale(&sum, &(F::one() / F::from_usize(k))), multiplicity: k });
    }
    out
}

/// Eigenvalues of an upper Hessenberg matrix by single-shift complex QR.
fn hessenberg_eigenvalues<F: FloatScalar>(mut h: Vec<Vec<C<F>>>) -> Result<Vec<C<F>>, NumericsError> {
    let n = h.len();
    let eps = F::epsilon();
    let mut out = Vec::with_capacity(n);
    let mut hi = n;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        let top = hi - 1;
        if top == 0 {
            out.push(h[0][0].clone());
            break;
        }
        let mut lo = top;
        while lo > 0 {
            let s = cabs(&h[lo][lo]) + cabs(&h[lo - 1][lo - 1]);
            let s = if s.is_zero() { F::one() } else { s };
            if cabs(&h[lo][lo - 1]) <= eps.clone() * s {
                h[lo][lo - 1] = C::zero();
                break;
            }
            lo -= 1;
        }
        if lo == top {
            out.push(h[top][top].clone());
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > 200 * n {
            return Err(NumericsError::NonConvergence("companion QR".into()));
        }
        let a = h[top - 1][top - 1].clone();
        let b = h[top - 1][top].clone();
        let c = h[top][top - 1].clone();
        let d = h[top][top].clone();
        let half = F::from_ratio(1, 2);
        let tr = cscale(&(a.clone() + d.clone()), &half);
        let diff = cscale(&(a - d.clone()), &half);
        let disc = csqrt(&(diff.clone() * diff + b * c.clone()));
        let l1 = tr.clone() + disc.clone();
        let l2 = tr - disc;
        let mut shift = if cabs(&(l1.clone() - d.clone())) < cabs(&(l2.clone() - d)) { l1 } else { l2 };
        if iter % 11 == 10 {
            let bump = cabs(&c) + cabs(&h[top - 1][top - 1]);
            shift = shift + C::new(bump.clone() * F::from_ratio(3, 4), bump * F::from_ratio(1, 3));
        }
        qr_step(&mut h, lo, top, &shift);
    }
    Ok(out)
}

fn qr_step<F: FloatScalar>(h: &mut [Vec<C<F>>], lo: usize, hi: usize, shift: &C<F>) {
    for i in lo..=hi {
        h[i][i] = h[i][i].clone() - shift.clone();
    }
    let mut rots: Vec<(C<F>, C<F>)> = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let x = h[k][k].clone();
        let y = h[k + 1][k].clone();
        let r = (cabs(&x) * cabs(&x) + cabs(&y) * cabs(&y)).sqrt();
        let (c, s) = if r.is_zero() {
            (C::one(), C::zero())
        } else {
            let inv = F::one() / r;
            (cscale(&x, &inv), cscale(&y, &inv))
        };
        for j in k..=hi {
            let u = h[k][j].clone();
            let v = h[k + 1][j].clone();
            h[k][j] = cconj(&c) * u.clone() + cconj(&s) * v.clone();
            h[k + 1][j] = -(s.clone() * u) + c.clone() * v;
        }
        rots.push((c, s));
    }
    for (idx, (c, s)) in rots.into_iter().enumerate() {
        let k = lo + idx;
        let last = (k + 2).min(hi);
        for row in h.iter_mut().take(last + 1).skip(lo) {
            let u = row[k].clone();
            let v = row[k + 1].clone();
            row[k] = u.clone() * c.clone() + v.clone() * s.clone();
            row[k + 1] = -(u * cconj(&s)) + v * cconj(&c);
        }
    }
    for i in lo..=hi {
        h[i][i] = h[i][i].clone() + shift.clone();
    }
}

/// Continued-fraction reconstruction of a float as a rational with a
/// bounded denominator.
pub fn rationalize<F: Scalar>(x: &F, max_den: u64) -> Option<num::BigRational> {
    use num::{BigInt, BigRational, Signed, ToPrimitive};
    let target = x.to_rational()?;
    let mut h = (BigInt::from(1), BigInt::from(0));
    let mut k = (BigInt::from(0), BigInt::from(1));
    let mut r = target.clone();
    for _ in 0..64 {
        let a = r.floor().to_integer();
        let nh = &a * &h.0 + &h.1;
        let nk = &a * &k.0 + &k.1;
        if nk.abs().to_u64().is_none_or(|d| d > max_den) {
            break;
        }
        h = (nh, h.0);
        k = (nk, k.0);
        let frac = r.clone() - BigRational::from_integer(a);
        if frac.is_zero() {
            break;
        }
        r = frac.recip();
    }
    if k.0.is_zero() {
        return None;
    }
    Some(BigRational::new(h.0, k.0))
}
