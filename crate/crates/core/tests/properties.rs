use mixed_mops::geronimus::{dw_table, existence_scan, Perturbation};
use mixed_mops::jacobi_pineiro::{step_line, JpParams};
use mixed_mops::kernels::cd_identity_residual;
use mixed_mops::matpoly::MatrixPolynomial;
use mixed_mops::measures::{
    moment_relation_residual, Component, MassParameters, MatrixOfMeasures, MomentGenerator, PerturbOptions,
};
use mixed_mops::mops::GaussBorel;
use mixed_mops::numerics::scalar::ratio;
use mixed_mops::{BigRational, DenseMatrix, ScalarPoly};
use proptest::prelude::*;
use std::sync::OnceLock;

type Q = BigRational;

const BOUNDARY: PerturbOptions = PerturbOptions { allow_boundary: true };

fn small_q() -> impl Strategy<Value = Q> {
    (-20i64..20, 1i64..7).prop_map(|(n, d)| ratio(n, d))
}

fn jp() -> &'static (JpParams<Q>, MatrixOfMeasures<Q>, GaussBorel<Q>) {
    static CELL: OnceLock<(JpParams<Q>, MatrixOfMeasures<Q>, GaussBorel<Q>)> = OnceLock::new();
    CELL.get_or_init(|| {
        let jp = JpParams::example();
        let mom = jp.measures().unwrap();
        let f = GaussBorel::factorize(&mom, 10).unwrap();
        (jp, mom, f)
    })
}

fn sqrt_weight() -> MatrixOfMeasures<Q> {
    MatrixOfMeasures::scalar(MomentGenerator::jacobi(ratio(1, 2), ratio(0, 1), ratio(2, 3)).unwrap())
}

fn monomial_r() -> MatrixPolynomial<Q> {
    MatrixPolynomial::from_entries(&[vec![ScalarPoly::new(vec![ratio(0, 1), ratio(1, 1)])]]).unwrap()
}

fn matrix_poly(coeffs: Vec<Vec<Q>>) -> MatrixPolynomial<Q> {
    let mats = coeffs.iter().map(|c| DenseMatrix::from_rows(vec![c[..2].to_vec(), c[2..].to_vec()]).unwrap()).collect();
    MatrixPolynomial::new(mats).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn step_line_is_balanced(n in 0usize..200) {
        let s = step_line(n);
        prop_assert_eq!(s.iter().sum::<usize>(), n);
        prop_assert!(s[0] >= s[1] && s[1] >= s[2] && s[0] - s[2] <= 1);
    }

    #[test]
    fn omega_closed_form_matches_the_linear_solve(x0 in small_q(), x1 in small_q()) {
        let (jp, mom, f) = jp();
        let pert = jp.perturbation(x0, x1).unwrap();
        let dw = dw_table(f, mom, &pert, 6).unwrap();
        for n in 2..=6 {
            match (dw.omega_row(n), dw.omega_row_closed(n)) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
                (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
            }
        }
    }

    #[test]
    fn tau_scan_agrees_with_the_factorization(x0 in small_q(), x1 in small_q()) {
        let (jp, mom, _) = jp();
        let scan = existence_scan(mom, &jp.perturbation(x0, x1).unwrap(), 5, BOUNDARY).unwrap();
        prop_assert!(scan.consistent());
    }

    #[test]
    fn christoffel_darboux_at_random_points(x in small_q(), y in small_q(), n in 2usize..7) {
        prop_assume!(x != y);
        let (_, _, f) = jp();
        let t = f.recurrence_matrix();
        prop_assert!(cd_identity_residual(f, &t, n, &x, &y).unwrap().is_zero());
    }

    #[test]
    fn scalar_model_tau_and_moments(xi in small_q()) {
        let mom = sqrt_weight();
        let f = GaussBorel::factorize(&mom, 4).unwrap();
        let pert = Perturbation::from_polynomial(monomial_r(), MassParameters::scalar(vec![xi.clone()]), Some(&[ratio(0, 1)])).unwrap();
        let dw = dw_table(&f, &mom, &pert, 2).unwrap();
        prop_assert_eq!(dw.tau(0).unwrap(), -(ratio(2, 1) + xi));
        let perturbed = pert.apply(&mom, BOUNDARY).unwrap();
        prop_assert!(moment_relation_residual(&mom, &perturbed, &pert.r, 6).unwrap().is_zero());
    }

    #[test]
    fn adjugate_inverts_up_to_the_determinant(c in proptest::collection::vec(proptest::collection::vec(small_q(), 4), 3)) {
        let r = matrix_poly(c);
        prop_assume!(r.is_regular());
        let prod = r.adjugate_poly().mul(&r).unwrap().trimmed();
        let det = r.determinant_poly();
        let want = MatrixPolynomial::from_entries(&[
            vec![det.clone(), ScalarPoly::zero()],
            vec![ScalarPoly::zero(), det],
        ]).unwrap().trimmed();
        prop_assert_eq!(prod, want);
    }

    #[test]
    fn determinant_is_multiplicative(a in proptest::collection::vec(small_q(), 9), b in proptest::collection::vec(small_q(), 9)) {
        let ma = DenseMatrix::from_fn(3, 3, |i, j| a[3 * i + j].clone());
        let mb = DenseMatrix::from_fn(3, 3, |i, j| b[3 * i + j].clone());
        prop_assert_eq!(ma.mul(&mb).determinant().unwrap(), ma.determinant().unwrap() * mb.determinant().unwrap());
    }

    #[test]
    fn discrete_families_are_biorthogonal(w in proptest::collection::vec(1i64..9, 24)) {
        let comps = (0..2)
            .map(|c| {
                let nodes = (0..12).map(|k| (ratio(k as i64 + 1, 13), ratio(w[12 * c + k], 1))).collect();
                Component::from_generator(MomentGenerator::discrete(nodes))
            })
            .collect();
        let mom = MatrixOfMeasures::new(vec![comps]).unwrap();
        let f = GaussBorel::factorize(&mom, 9).unwrap();
        prop_assert_eq!(f.biorthogonality(&mom, 9).unwrap(), DenseMatrix::identity(10));
        prop_assert!(f.degree_structure().ok());
    }
}
