//! Matrices of measures, their moments, and Geronimus-perturbed measures.

use std::sync::{Arc, RwLock};

use thiserror::Error;

use crate::matpoly::{MatPolyError, MatrixPolynomial, SpectralData};
use crate::numerics::poly::{binomial, series};
use crate::numerics::special::{factorial, pochhammer};
use crate::numerics::{DenseMatrix, NumericsError, Scalar, ScalarPoly};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("not integrable: {0}")]
    NonIntegrable(String),
    #[error("no Cauchy seed available: {0}")]
    SeedUnavailable(String),
    #[error("moment {0} is not available")]
    MomentUnavailable(usize),
    #[error("{found} mass parameters supplied, {expected} required")]
    MassCountMismatch { expected: usize, found: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error(transparent)]
    MatPoly(#[from] MatPolyError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

type Result<T> = std::result::Result<T, MeasureError>;

/// Where a point sits relative to the absolutely continuous support.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    Outside,
    Boundary,
    Interior,
}

#[derive(Debug)]
pub enum GeneratorKind<F> {
    /// `m0 · x^α (1-x)^β dx / B(α+1, β+1)` on `[0,1]`.
    Jacobi { alpha: F, beta: F, m0: F },
    /// `Σ w_j δ(x - x_j)`, given as `(x_j, w_j)`.
    Discrete { nodes: Vec<(F, F)> },
    /// A finite moment list with an optional support interval.
    Explicit { moments: Vec<F>, support: Option<(F, F)> },
    /// `dμ_base / (x - c)` with `seed = ∫ dμ_base / (x - c)`.
    Pole { base: Arc<MomentGenerator<F>>, c: F, seed: F },
    /// The moments of `base` with prescribed pole integrals `(z, order, value)`.
    Seeded { base: Arc<MomentGenerator<F>>, seeds: Vec<(F, usize, F)> },
}

/// A scalar measure known through its moments and pole integrals.
#[derive(Debug)]
pub struct MomentGenerator<F> {
    kind: GeneratorKind<F>,
    moments: RwLock<Vec<F>>,
    poles: RwLock<Vec<(F, usize, F)>>,
}

impl<F: Scalar> MomentGenerator<F> {
    fn wrap(kind: GeneratorKind<F>) -> Arc<Self> {
        Arc::new(MomentGenerator { kind, moments: RwLock::new(Vec::new()), poles: RwLock::new(Vec::new()) })
    }

    pub fn jacobi(alpha: F, beta: F, m0: F) -> Result<Arc<Self>> {
        let minus_one = -F::one();
        if alpha <= minus_one || beta <= minus_one {
            return Err(MeasureError::NonIntegrable("Jacobi exponents must exceed -1".into()));
        }
        Ok(Self::wrap(GeneratorKind::Jacobi { alpha, beta, m0 }))
    }

    pub fn uniform() -> Arc<Self> {
        Self::wrap(GeneratorKind::Jacobi { alpha: F::zero(), beta: F::zero(), m0: F::one() })
    }

    pub fn discrete(nodes: Vec<(F, F)>) -> Arc<Self> {
        Self::wrap(GeneratorKind::Discrete { nodes })
    }

    pub fn explicit(moments: Vec<F>, support: Option<(F, F)>) -> Arc<Self> {
        Self::wrap(GeneratorKind::Explicit { moments, support })
    }

    /// `dμ_base / (x - c)`; the seed is computed when not supplied.
    pub fn pole(base: Arc<Self>, c: F, seed: Option<F>) -> Result<Arc<Self>> {
        let seed = match seed {
            Some(s) => s,
            None => base.pole_integral(&c, 1)?,
        };
        Ok(Self::wrap(GeneratorKind::Pole { base, c, seed }))
    }

    /// Overrides selected pole integrals. With values other than the true
    /// integrals this is a formal linear functional: identities that are
    /// affine in the Cauchy transforms still hold exactly.
    pub fn seeded(base: Arc<Self>, seeds: Vec<(F, usize, F)>) -> Arc<Self> {
        Self::wrap(GeneratorKind::Seeded { base, seeds })
    }

    pub fn kind(&self) -> &GeneratorKind<F> {
        &self.kind
    }

    pub fn location(&self, x: &F) -> Location {
        match &self.kind {
            GeneratorKind::Jacobi { .. } => interval_location(x, &F::zero(), &F::one()),
            GeneratorKind::Discrete { nodes } => {
                if nodes.iter().any(|(n, _)| n == x) {
                    Location::Interior
                } else {
                    Location::Outside
                }
            }
            GeneratorKind::Explicit { support, .. } => match support {
                Some((lo, hi)) => interval_location(x, lo, hi),
                None => Location::Interior,
            },
            GeneratorKind::Pole { base, .. } | GeneratorKind::Seeded { base, .. } => base.location(x),
        }
    }

    pub fn moment(&self, k: usize) -> Result<F> {
        if let Some(v) = self.moments.read().expect("moment cache").get(k) {
            return Ok(v.clone());
        }
        let start = self.moments.read().expect("moment cache").len();
        let mut fresh = Vec::with_capacity(k + 1 - start);
        for j in start..=k {
            let prev = if j == 0 {
                None
            } else if j - 1 >= start {
                fresh.last().cloned()
            } else {
                self.moments.read().expect("moment cache").get(j - 1).cloned()
            };
            fresh.push(self.compute_moment(j, prev)?);
        }
        let mut cache = self.moments.write().expect("moment cache");
        if cache.len() == start {
            cache.extend(fresh);
        }
        Ok(cache[k].clone())
    }

    fn compute_moment(&self, k: usize, prev: Option<F>) -> Result<F> {
        match &self.kind {
            GeneratorKind::Jacobi { alpha, beta, m0 } => {
                let a1 = alpha.clone() + F::one();
                let ab2 = alpha.clone() + beta.clone() + F::from_i64(2);
                Ok(m0.clone() * pochhammer(&a1, k) / pochhammer(&ab2, k))
            }
            GeneratorKind::Discrete { nodes } => {
                Ok(nodes.iter().fold(F::zero(), |acc, (x, w)| acc + w.clone() * x.powi(k)))
            }
            GeneratorKind::Explicit { moments, .. } => moments.get(k).cloned().ok_or(MeasureError::MomentUnavailable(k)),
            GeneratorKind::Pole { base, c, seed } => match prev {
                None => Ok(seed.clone()),
                Some(g) => Ok(c.clone() * g + base.moment(k - 1)?),
            },
            GeneratorKind::Seeded { base, .. } => base.moment(k),
        }
    }

    /// `∫ dμ(x) / (x - z)^m`; `m = 0` gives the total mass.
    pub fn pole_integral(&self, z: &F, m: usize) -> Result<F> {
        if m == 0 {
            return self.moment(0);
        }
        if let Some((_, _, v)) = self.poles.read().expect("pole cache").iter().find(|(x, k, _)| x == z && *k == m) {
            return Ok(v.clone());
        }
        let v = self.compute_pole(z, m)?;
        self.poles.write().expect("pole cache").push((z.clone(), m, v.clone()));
        Ok(v)
    }

    fn compute_pole(&self, z: &F, m: usize) -> Result<F> {
        match &self.kind {
            GeneratorKind::Jacobi { alpha, beta, m0 } => {
                let mi = F::from_usize(m);
                let minus_one = -F::one();
                let ab2m = alpha.clone() + beta.clone() + F::from_i64(2) - mi.clone();
                if z.is_zero() {
                    if alpha.clone() - mi.clone() <= minus_one {
                        return Err(MeasureError::NonIntegrable(format!("pole of order {m} at 0 with exponent {alpha}")));
                    }
                    let a1m = alpha.clone() + F::one() - mi;
                    return Ok(m0.clone() * pochhammer(&ab2m, m) / pochhammer(&a1m, m));
                }
                if z.is_one() {
                    if beta.clone() - mi.clone() <= minus_one {
                        return Err(MeasureError::NonIntegrable(format!("pole of order {m} at 1 with exponent {beta}")));
                    }
                    let b1m = beta.clone() + F::one() - mi;
                    let sign = if m % 2 == 0 { F::one() } else { -F::one() };
                    return Ok(sign * m0.clone() * pochhammer(&ab2m, m) / pochhammer(&b1m, m));
                }
                if *z > F::zero() && *z < F::one() {
                    return Err(MeasureError::NonIntegrable(format!("pole at {z} inside [0,1]")));
                }
                let raw = F::jacobi_quadrature(alpha, beta, z, m as u32)
                    .ok_or_else(|| MeasureError::SeedUnavailable(format!("Jacobi pole at {z} needs float mode")))?;
                let one = F::one();
                let g = |x: F| x.gamma_opt().ok_or_else(|| MeasureError::SeedUnavailable("gamma unavailable".into()));
                let norm = g(alpha.clone() + one.clone())? * g(beta.clone() + one.clone())?
                    / g(alpha.clone() + beta.clone() + F::from_i64(2))?;
                Ok(m0.clone() * raw / norm)
            }
            GeneratorKind::Discrete { nodes } => {
                let mut acc = F::zero();
                for (x, w) in nodes {
                    let d = x.clone() - z.clone();
                    if d.is_zero() {
                        return Err(MeasureError::NonIntegrable(format!("pole at the node {z}")));
                    }
                    acc = acc + w.clone() / d.powi(m);
                }
                Ok(acc)
            }
            GeneratorKind::Explicit { .. } => {
                Err(MeasureError::SeedUnavailable("explicit moment lists carry no pole integrals".into()))
            }
            GeneratorKind::Pole { base, c, seed } => {
                if z == c {
                    return base.pole_integral(c, m + 1);
                }
                let d = c.clone() - z.clone();
                let mut acc = seed.clone() / d.powi(m);
                for j in 1..=m {
                    acc = acc - base.pole_integral(z, j)? / d.powi(m - j + 1);
                }
                Ok(acc)
            }
            GeneratorKind::Seeded { base, seeds } => match seeds.iter().find(|(x, k, _)| x == z && *k == m) {
                Some((_, _, v)) => Ok(v.clone()),
                None => base.pole_integral(z, m),
            },
        }
    }
}

fn interval_location<F: Scalar>(x: &F, lo: &F, hi: &F) -> Location {
    if x == lo || x == hi {
        Location::Boundary
    } else if x > lo && x < hi {
        Location::Interior
    } else {
        Location::Outside
    }
}

/// `numerator(x) · dμ_generator(x)`.
#[derive(Clone, Debug)]
pub struct Density<F: Scalar> {
    pub generator: Arc<MomentGenerator<F>>,
    pub numerator: ScalarPoly<F>,
}

impl<F: Scalar> Density<F> {
    pub fn new(generator: Arc<MomentGenerator<F>>) -> Self {
        Density { generator, numerator: ScalarPoly::one() }
    }

    pub fn moment(&self, k: usize) -> Result<F> {
        let mut acc = F::zero();
        for (i, c) in self.numerator.coeffs().iter().enumerate() {
            if !c.is_zero() {
                acc = acc + c.clone() * self.generator.moment(k + i)?;
            }
        }
        Ok(acc)
    }

    pub fn pole_integral(&self, z: &F, m: usize) -> Result<F> {
        let shifted = self.numerator.shift(z);
        let mut acc = F::zero();
        for (t, c) in shifted.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let v = if t < m {
                self.generator.pole_integral(z, m - t)?
            } else {
                let e = t - m;
                let mut s = F::zero();
                for j in 0..=e {
                    let b = F::from_rational(&binomial(e, j));
                    s = s + b * (-z.clone()).powi(e - j) * self.generator.moment(j)?;
                }
                s
            };
            acc = acc + c.clone() * v;
        }
        Ok(acc)
    }
}

/// `f(x) δ^{(order)}(x - location)` where `jet` holds the Taylor
/// coefficients of `f` at the location.
#[derive(Clone, Debug, PartialEq)]
pub struct PointMass<F> {
    pub location: F,
    pub order: usize,
    pub jet: Vec<F>,
}

impl<F: Scalar> PointMass<F> {
    pub fn simple(location: F, weight: F) -> Self {
        PointMass { location, order: 0, jet: vec![weight] }
    }

    /// `(-1)^l l! [t^l] (g(x0 + t) f(x0 + t))` for a series `g`.
    fn apply(&self, g: &[F]) -> F {
        let l = self.order;
        let prod = series::mul(g, &self.jet, l + 1);
        let v = prod[l].clone() * factorial::<F>(l);
        if l % 2 == 0 {
            v
        } else {
            -v
        }
    }

    pub fn moment(&self, k: usize) -> F {
        let g = ScalarPoly::monomial(F::one(), k).shift(&self.location);
        let mut coeffs = g.coeffs().to_vec();
        coeffs.resize(self.order + 1, F::zero());
        self.apply(&coeffs)
    }

    pub fn pole_integral(&self, z: &F, m: usize) -> Result<F> {
        let d = self.location.clone() - z.clone();
        if d.is_zero() && m > 0 {
            return Err(MeasureError::NonIntegrable(format!("pole at the mass location {z}")));
        }
        Ok(self.apply(&series::inverse_power(&d, m, self.order + 1)?))
    }
}

/// One entry `dμ_{b,a}` of the matrix of measures.
#[derive(Clone, Debug, Default)]
pub struct Component<F: Scalar> {
    pub densities: Vec<Density<F>>,
    pub masses: Vec<PointMass<F>>,
}

impl<F: Scalar> Component<F> {
    pub fn zero() -> Self {
        Component { densities: Vec::new(), masses: Vec::new() }
    }

    pub fn from_generator(g: Arc<MomentGenerator<F>>) -> Self {
        Component { densities: vec![Density::new(g)], masses: Vec::new() }
    }

    pub fn with_mass(mut self, mass: PointMass<F>) -> Self {
        self.masses.push(mass);
        self
    }

    pub fn is_zero(&self) -> bool {
        self.densities.is_empty() && self.masses.is_empty()
    }

    pub fn moment(&self, k: usize) -> Result<F> {
        let mut acc = F::zero();
        for d in &self.densities {
            acc = acc + d.moment(k)?;
        }
        for m in &self.masses {
            acc = acc + m.moment(k);
        }
        Ok(acc)
    }

    pub fn pole_integral(&self, z: &F, m: usize) -> Result<F> {
        let mut acc = F::zero();
        for d in &self.densities {
            acc = acc + d.pole_integral(z, m)?;
        }
        for pm in &self.masses {
            acc = acc + pm.pole_integral(z, m)?;
        }
        Ok(acc)
    }

    /// `table[j][k] = ∫ x^k dμ / (x - z)^j` for `j <= m`, `k < count`.
    pub fn pole_moments(&self, z: &F, m: usize, count: usize) -> Result<Vec<Vec<F>>> {
        let mut table: Vec<Vec<F>> = Vec::with_capacity(m + 1);
        table.push((0..count).map(|k| self.moment(k)).collect::<Result<_>>()?);
        for j in 1..=m {
            let mut row = Vec::with_capacity(count);
            if count > 0 {
                row.push(self.pole_integral(z, j)?);
            }
            for k in 1..count {
                let v = z.clone() * row[k - 1].clone() + table[j - 1][k - 1].clone();
                row.push(v);
            }
            table.push(row);
        }
        Ok(table)
    }

    /// Worst location of `x` among the continuous parts.
    pub fn location(&self, x: &F) -> Location {
        let mut worst = Location::Outside;
        for d in &self.densities {
            match d.generator.location(x) {
                Location::Interior => return Location::Interior,
                Location::Boundary => worst = Location::Boundary,
                Location::Outside => {}
            }
        }
        worst
    }
}

/// A `q × p` matrix of measures.
#[derive(Clone, Debug)]
pub struct MatrixOfMeasures<F: Scalar> {
    q: usize,
    p: usize,
    components: Vec<Vec<Component<F>>>,
}

impl<F: Scalar> MatrixOfMeasures<F> {
    pub fn new(components: Vec<Vec<Component<F>>>) -> Result<Self> {
        let q = components.len();
        let p = components.first().map_or(0, Vec::len);
        if q == 0 || p == 0 || components.iter().any(|r| r.len() != p) {
            return Err(MeasureError::ShapeMismatch("components must form a nonempty rectangle".into()));
        }
        Ok(MatrixOfMeasures { q, p, components })
    }

    /// A `1 × 1` matrix holding one generator.
    pub fn scalar(g: Arc<MomentGenerator<F>>) -> Self {
        MatrixOfMeasures { q: 1, p: 1, components: vec![vec![Component::from_generator(g)]] }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn component(&self, b: usize, a: usize) -> &Component<F> {
        &self.components[b][a]
    }

    pub fn component_mut(&mut self, b: usize, a: usize) -> &mut Component<F> {
        &mut self.components[b][a]
    }

    pub fn transpose(&self) -> Self {
        let components = (0..self.p).map(|a| (0..self.q).map(|b| self.components[b][a].clone()).collect()).collect();
        MatrixOfMeasures { q: self.p, p: self.q, components }
    }

    pub fn moment(&self, b: usize, a: usize, k: usize) -> Result<F> {
        self.components[b][a].moment(k)
    }

    /// Scalar-indexed truncation: entry `(i, j)` is the moment of order
    /// `i/q + j/p` of component `(i mod q, j mod p)`.
    pub fn scalar_moment_matrix(&self, rows: usize, cols: usize) -> Result<DenseMatrix<F>> {
        let (q, p) = (self.q, self.p);
        let mut tables: Vec<Vec<Vec<F>>> = Vec::with_capacity(q);
        let kmax = rows.div_ceil(q) + cols.div_ceil(p);
        for b in 0..q {
            let mut row = Vec::with_capacity(p);
            for a in 0..p {
                row.push((0..kmax).map(|k| self.moment(b, a, k)).collect::<Result<Vec<F>>>()?);
            }
            tables.push(row);
        }
        Ok(DenseMatrix::from_fn(rows, cols, |i, j| tables[i % q][j % p][i / q + j / p].clone()))
    }

    /// Block truncation with `(n+1) q` rows and `(n+1) p` columns.
    pub fn moment_matrix(&self, n: usize) -> Result<DenseMatrix<F>> {
        self.scalar_moment_matrix((n + 1) * self.q, (n + 1) * self.p)
    }

    /// `F(z) = ∫ dμ(x) / (z - x)`.
    pub fn stieltjes(&self, z: &F) -> Result<DenseMatrix<F>> {
        let mut out = DenseMatrix::zeros(self.q, self.p);
        for b in 0..self.q {
            for a in 0..self.p {
                out[(b, a)] = -self.components[b][a].pole_integral(z, 1)?;
            }
        }
        Ok(out)
    }

    /// Replaces every density generator through `f(b, a, generator)`.
    pub fn map_generators(
        &self,
        f: impl Fn(usize, usize, &Arc<MomentGenerator<F>>) -> Arc<MomentGenerator<F>>,
    ) -> Self {
        let mut out = self.clone();
        for (b, row) in out.components.iter_mut().enumerate() {
            for (a, c) in row.iter_mut().enumerate() {
                for d in &mut c.densities {
                    d.generator = f(b, a, &d.generator);
                }
            }
        }
        out
    }

    pub fn location(&self, x: &F) -> Location {
        let mut worst = Location::Outside;
        for c in self.components.iter().flatten() {
            match c.location(x) {
                Location::Interior => return Location::Interior,
                Location::Boundary => worst = Location::Boundary,
                Location::Outside => {}
            }
        }
        worst
    }
}

/// Free mass parameters: one `width`-vector of jets per chain slot.
#[derive(Clone, Debug, PartialEq)]
pub struct MassParameters<F> {
    slots: Vec<Vec<Vec<F>>>,
}

impl<F: Scalar> MassParameters<F> {
    /// `slots[s][b]` lists the Taylor coefficients of `ξ_{s;b}` at the eigenvalue.
    pub fn new(slots: Vec<Vec<Vec<F>>>) -> Self {
        MassParameters { slots }
    }

    /// Constant parameters, `values[s][b]`.
    pub fn constant(values: Vec<Vec<F>>) -> Self {
        MassParameters { slots: values.into_iter().map(|v| v.into_iter().map(|x| vec![x]).collect()).collect() }
    }

    /// Constant scalar parameters (width one).
    pub fn scalar(values: Vec<F>) -> Self {
        Self::constant(values.into_iter().map(|x| vec![x]).collect())
    }

    pub fn zeros(count: usize, width: usize) -> Self {
        Self::constant(vec![vec![F::zero(); width]; count])
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn width(&self) -> usize {
        self.slots.first().map_or(0, Vec::len)
    }

    pub fn jet(&self, slot: usize, b: usize) -> &[F] {
        &self.slots[slot][b]
    }

    /// Taylor coefficient `l` of `ξ_{slot;b}`.
    pub fn coeff(&self, slot: usize, b: usize, l: usize) -> F {
        self.slots[slot][b].get(l).cloned().unwrap_or_else(F::zero)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PerturbOptions {
    /// Admit eigenvalues on the boundary of the support when the
    /// resulting components stay integrable.
    pub allow_boundary: bool,
}

/// Partial fractions of `num / det`: polynomial part and
/// `(eigen index, order, coefficient)` pole terms.
#[derive(Clone, Debug)]
pub struct PartialFractions<F: Scalar> {
    pub polynomial: ScalarPoly<F>,
    pub poles: Vec<(usize, usize, F)>,
}

pub fn partial_fractions<F: Scalar>(
    num: &ScalarPoly<F>,
    det: &ScalarPoly<F>,
    spec: &SpectralData<F>,
) -> Result<PartialFractions<F>> {
    let (polynomial, _) = num.div_rem(det)?;
    let mut poles = Vec::new();
    for (i, e) in spec.eigenvalues.iter().enumerate() {
        let x0 = &e.value;
        let k = det.root_multiplicity(x0);
        let mut h = det.clone();
        for _ in 0..k {
            h = h.div_linear(x0).0;
        }
        let ns = num.shift(x0);
        let hs = h.shift(x0);
        let ncoef: Vec<F> = (0..k).map(|j| ns.coeff(j)).collect();
        let hcoef: Vec<F> = (0..k).map(|j| hs.coeff(j)).collect();
        let s = series::div(&ncoef, &hcoef, k)?;
        for (j, c) in s.into_iter().enumerate() {
            if !c.is_zero() {
                poles.push((i, k - j, c));
            }
        }
    }
    Ok(PartialFractions { polynomial, poles })
}

fn pole_generator<F: Scalar>(base: &Arc<MomentGenerator<F>>, c: &F, m: usize) -> Result<Arc<MomentGenerator<F>>> {
    let mut g = base.clone();
    for _ in 0..m {
        g = MomentGenerator::pole(g, c.clone(), None)?;
    }
    Ok(g)
}

/// `numerator(x) dμ / (x - c)^m` as a list of densities.
fn divide_density<F: Scalar>(d: &Density<F>, c: &F, m: usize, coef: &F) -> Result<Vec<Density<F>>> {
    let shifted = d.numerator.shift(c);
    let mut out = Vec::new();
    let mut poly_part = vec![F::zero(); shifted.coeffs().len().saturating_sub(m)];
    for (t, v) in shifted.coeffs().iter().enumerate() {
        if v.is_zero() {
            continue;
        }
        if t < m {
            out.push(Density {
                generator: pole_generator(&d.generator, c, m - t)?,
                numerator: ScalarPoly::constant(v.clone() * coef.clone()),
            });
        } else {
            poly_part[t - m] = v.clone() * coef.clone();
        }
    }
    let poly_part = ScalarPoly::new(poly_part);
    if !poly_part.is_zero() {
        let minus_c = -c.clone();
        out.push(Density { generator: d.generator.clone(), numerator: poly_part.shift(&minus_c) });
    }
    Ok(out)
}

/// `dμ̌ = dμ R^{-1} + Σ ξ_{i,j,k}(x) Σ_l ((-1)^l / l!) v^L_{i,j;k-l} δ^{(l)}(x - x_i)`.
pub fn perturb_right<F: Scalar>(
    mom: &MatrixOfMeasures<F>,
    r: &MatrixPolynomial<F>,
    spec: &SpectralData<F>,
    xi: &MassParameters<F>,
    opts: PerturbOptions,
) -> Result<MatrixOfMeasures<F>> {
    let (q, p) = (mom.q, mom.p);
    if r.size() != p {
        return Err(MeasureError::ShapeMismatch(format!("R is {0}x{0}, measure has {p} columns", r.size())));
    }
    let slots = spec.left_slots();
    if xi.len() != slots.len() {
        return Err(MeasureError::MassCountMismatch { expected: slots.len(), found: xi.len() });
    }
    if !xi.is_empty() && xi.width() != q {
        return Err(MeasureError::ShapeMismatch(format!("mass vectors have width {}, expected {q}", xi.width())));
    }
    for e in &spec.eigenvalues {
        match mom.location(&e.value) {
            Location::Interior => {
                return Err(MeasureError::NonIntegrable(format!("eigenvalue {} lies inside the support", e.value)))
            }
            Location::Boundary if !opts.allow_boundary => {
                return Err(MeasureError::NonIntegrable(format!(
                    "eigenvalue {} lies on the support boundary (boundary eigenvalues are not enabled)",
                    e.value
                )))
            }
            _ => {}
        }
    }
    let det = &spec.det;
    let adj = r.adjugate();
    let mut fractions: Vec<Vec<PartialFractions<F>>> = Vec::with_capacity(p);
    for row in &adj {
        fractions.push(row.iter().map(|num| partial_fractions(num, det, spec)).collect::<Result<_>>()?);
    }
    let mut components = vec![vec![Component::zero(); p]; q];
    for (b, row) in components.iter_mut().enumerate() {
        for (a, out) in row.iter_mut().enumerate() {
            for c in 0..p {
                let src = &mom.components[b][c];
                let pf = &fractions[c][a];
                for d in &src.densities {
                    if !pf.polynomial.is_zero() {
                        out.densities.push(Density {
                            generator: d.generator.clone(),
                            numerator: d.numerator.mul(&pf.polynomial),
                        });
                    }
                    for (i, m, coef) in &pf.poles {
                        out.densities.extend(divide_density(d, &spec.eigenvalues[*i].value, *m, coef)?);
                    }
                }
                for pm in &src.masses {
                    let series_at = rational_series(&adj[c][a], det, &pm.location, pm.order + pm.jet.len())?;
                    let jet = series::mul(&pm.jet, &series_at, pm.order + 1);
                    out.masses.push(PointMass { location: pm.location.clone(), order: pm.order, jet });
                }
            }
        }
    }
    for (s, slot) in slots.iter().enumerate() {
        let e = &spec.eigenvalues[slot.eigen];
        let chain = &e.left[slot.chain];
        for l in 0..=slot.index {
            let v = &chain.vectors[slot.index - l];
            let scale = factorial::<F>(l);
            let sign = if l % 2 == 0 { F::one() } else { -F::one() };
            for (a, va) in v.iter().enumerate() {
                if va.is_zero() {
                    continue;
                }
                let factor = sign.clone() * va.clone() / scale.clone();
                for (b, row) in components.iter_mut().enumerate() {
                    let jet: Vec<F> = xi.jet(s, b).iter().map(|x| x.clone() * factor.clone()).collect();
                    if jet.iter().all(|x| x.is_zero()) {
                        continue;
                    }
                    row[a].masses.push(PointMass { location: e.value.clone(), order: l, jet });
                }
            }
        }
    }
    MatrixOfMeasures::new(components)
}

/// Taylor coefficients of `num / den` at `x0` (which must not be a root of `den`).
fn rational_series<F: Scalar>(num: &ScalarPoly<F>, den: &ScalarPoly<F>, x0: &F, order: usize) -> Result<Vec<F>> {
    let ns = num.shift(x0);
    let ds = den.shift(x0);
    let n: Vec<F> = (0..order).map(|j| ns.coeff(j)).collect();
    let d: Vec<F> = (0..order).map(|j| ds.coeff(j)).collect();
    series::div(&n, &d, order)
        .map_err(|_| MeasureError::NonIntegrable(format!("existing point mass at the eigenvalue {x0}")))
}

/// `L(x) dμ̌ = dμ`: the transpose of a right perturbation of `dμᵀ` by `Lᵀ`.
pub fn perturb_left<F: Scalar>(
    mom: &MatrixOfMeasures<F>,
    l: &MatrixPolynomial<F>,
    spec: &SpectralData<F>,
    xi: &MassParameters<F>,
    opts: PerturbOptions,
) -> Result<MatrixOfMeasures<F>> {
    let t = perturb_right(&mom.transpose(), &l.transpose(), &spec.transposed(), xi, opts)?;
    Ok(t.transpose())
}

/// `∫ dμ / (x - c)` for one generator.
pub fn cauchy_seed<F: Scalar>(g: &MomentGenerator<F>, c: &F) -> Result<F> {
    g.pole_integral(c, 1)
}

/// `𝓜̌ R(Λᵀ) - 𝓜` on `(n+1) q` rows and `(n+1) p` columns, with the left
/// factor carrying the extra block columns the product needs.
pub fn moment_relation_residual<F: Scalar>(
    original: &MatrixOfMeasures<F>,
    perturbed: &MatrixOfMeasures<F>,
    r: &MatrixPolynomial<F>,
    n: usize,
) -> Result<DenseMatrix<F>> {
    let (q, p) = (original.q, original.p);
    let ext = n + r.degree();
    let left = perturbed.scalar_moment_matrix((n + 1) * q, (ext + 1) * p)?;
    let band = r.banded_substitute(ext).submatrix(0, (ext + 1) * p, 0, (n + 1) * p);
    let lhs = left.try_mul(&band)?;
    Ok(lhs.try_sub(&original.moment_matrix(n)?)?)
}

/// The left analog: `L(Λ) 𝓜̌ - 𝓜`.
pub fn moment_relation_residual_left<F: Scalar>(
    original: &MatrixOfMeasures<F>,
    perturbed: &MatrixOfMeasures<F>,
    l: &MatrixPolynomial<F>,
    n: usize,
) -> Result<DenseMatrix<F>> {
    Ok(moment_relation_residual(&original.transpose(), &perturbed.transpose(), &l.transpose(), n)?.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::scalar::ratio;
    use num::BigRational;

    type Q = BigRational;

    #[test]
    fn jacobi_moments() {
        let g = MomentGenerator::<Q>::jacobi(ratio(1, 2), ratio(1, 1), ratio(1, 1)).unwrap();
        assert_eq!(g.moment(1).unwrap(), ratio(3, 7));
        let u = MomentGenerator::<Q>::uniform();
        assert_eq!(u.moment(1).unwrap(), ratio(1, 2));
        assert_eq!(u.moment(5).unwrap(), ratio(1, 6));
    }

    #[test]
    fn endpoint_seeds() {
        let g = MomentGenerator::<Q>::jacobi(ratio(1, 2), ratio(0, 1), ratio(2, 3)).unwrap();
        assert_eq!(cauchy_seed(&g, &ratio(0, 1)).unwrap(), ratio(2, 1));
        let h = MomentGenerator::<Q>::jacobi(ratio(0, 1), ratio(1, 1), ratio(1, 2)).unwrap();
        assert_eq!(cauchy_seed(&h, &ratio(1, 1)).unwrap(), ratio(-1, 1));
        assert!(matches!(cauchy_seed(&h, &ratio(0, 1)), Err(MeasureError::NonIntegrable(_))));
        let u = MomentGenerator::<f64>::uniform();
        assert!((cauchy_seed(&u, &2.0).unwrap() + std::f64::consts::LN_2).abs() < 1e-13);
    }

    #[test]
    fn pole_generator_matches_shifted_jacobi() {
        let g = MomentGenerator::<Q>::jacobi(ratio(3, 2), ratio(2, 1), ratio(1, 1)).unwrap();
        let p = MomentGenerator::pole(g.clone(), ratio(0, 1), None).unwrap();
        let seed = g.pole_integral(&ratio(0, 1), 1).unwrap();
        let direct = MomentGenerator::<Q>::jacobi(ratio(1, 2), ratio(2, 1), seed).unwrap();
        for k in 0..10 {
            assert_eq!(p.moment(k).unwrap(), direct.moment(k).unwrap());
        }
        let pp = MomentGenerator::pole(p.clone(), ratio(1, 1), None).unwrap();
        let s2 = direct.pole_integral(&ratio(1, 1), 1).unwrap();
        let d2 = MomentGenerator::<Q>::jacobi(ratio(1, 2), ratio(1, 1), -s2).unwrap();
        for k in 0..10 {
            assert_eq!(-pp.moment(k).unwrap(), d2.moment(k).unwrap());
        }
    }

    #[test]
    fn discrete_pole_integrals_match_recurrence() {
        let g = MomentGenerator::<Q>::discrete(vec![(ratio(1, 3), ratio(1, 2)), (ratio(2, 3), ratio(1, 4))]);
        let z = ratio(-1, 1);
        let p = MomentGenerator::pole(g.clone(), z.clone(), None).unwrap();
        for k in 0..6 {
            let direct = ratio(1, 2) * ratio(1, 3).powi(k) / (ratio(1, 3) - z.clone())
                + ratio(1, 4) * ratio(2, 3).powi(k) / (ratio(2, 3) - z.clone());
            assert_eq!(p.moment(k).unwrap(), direct);
        }
        let w = ratio(5, 1);
        let want = ratio(1, 2) / ((ratio(1, 3) - z.clone()) * (ratio(1, 3) - w.clone()).powi(2))
            + ratio(1, 4) / ((ratio(2, 3) - z.clone()) * (ratio(2, 3) - w.clone()).powi(2));
        assert_eq!(p.pole_integral(&w, 2).unwrap(), want);
    }

    #[test]
    fn derivative_mass_moments() {
        let m = PointMass { location: ratio(2, 1), order: 1, jet: vec![ratio(3, 1), ratio(1, 1)] };
        // -(d/dx)[x^2 (3 + (x-2))] at 2 = -(2x(x+1) + x^2) = -16
        assert_eq!(m.moment(2), ratio(-16, 1));
        assert_eq!(PointMass::simple(ratio(1, 1), ratio(5, 1)).moment(3), ratio(5, 1));
    }

    #[test]
    fn scalar_geronimus_example() {
        let w = MatrixOfMeasures::scalar(MomentGenerator::<Q>::jacobi(ratio(1, 2), ratio(0, 1), ratio(2, 3)).unwrap());
        let r = MatrixPolynomial::new(vec![
            DenseMatrix::from_rows(vec![vec![ratio(0, 1)]]).unwrap(),
            DenseMatrix::from_rows(vec![vec![ratio(1, 1)]]).unwrap(),
        ])
        .unwrap();
        let spec = r.spectrum(Some(&[ratio(0, 1)])).unwrap();
        let xi = MassParameters::scalar(vec![ratio(3, 1)]);
        let strict = perturb_right(&w, &r, &spec, &xi, PerturbOptions::default());
        assert!(matches!(strict, Err(MeasureError::NonIntegrable(_))));
        let pert = perturb_right(&w, &r, &spec, &xi, PerturbOptions { allow_boundary: true }).unwrap();
        assert_eq!(pert.moment(0, 0, 0).unwrap(), ratio(5, 1));
        assert_eq!(pert.moment(0, 0, 1).unwrap(), ratio(2, 3));
        let res = moment_relation_residual(&w, &pert, &r, 4).unwrap();
        assert!(res.is_zero());
    }

    #[test]
    fn left_diagonal_perturbation() {
        let g1 = MomentGenerator::<Q>::jacobi(ratio(1, 2), ratio(1, 1), ratio(1, 1)).unwrap();
        let g2 = MomentGenerator::<Q>::jacobi(ratio(1, 3), ratio(1, 1), ratio(1, 1)).unwrap();
        let mom = MatrixOfMeasures::new(vec![
            vec![Component::from_generator(g1.clone())],
            vec![Component::from_generator(g2.clone())],
        ])
        .unwrap();
        let l = MatrixPolynomial::new(vec![
            DenseMatrix::from_rows(vec![vec![ratio(0, 1), ratio(0, 1)], vec![ratio(0, 1), ratio(1, 1)]]).unwrap(),
            DenseMatrix::from_rows(vec![vec![ratio(1, 1), ratio(0, 1)], vec![ratio(0, 1), ratio(0, 1)]]).unwrap(),
        ])
        .unwrap();
        let spec = l.spectrum(None).unwrap();
        let xi = MassParameters::scalar(vec![ratio(1, 5)]);
        let pert = perturb_left(&mom, &l, &spec, &xi, PerturbOptions { allow_boundary: true }).unwrap();
        assert_eq!(pert.moment(1, 0, 3).unwrap(), g2.moment(3).unwrap());
        assert_eq!(pert.moment(0, 0, 0).unwrap(), g1.pole_integral(&ratio(0, 1), 1).unwrap() + ratio(1, 5));
        assert!(moment_relation_residual_left(&mom, &pert, &l, 5).unwrap().is_zero());
    }
}
