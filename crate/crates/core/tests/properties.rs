use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nct::heisenberg::{dual_lattice, theta_of, HeisenbergLattice};
use nct::moduli::{canonicalize, circular_distance, equivalent, ModuliPoint};
use nct::phase;
use nct::sample::{random_connection, random_element, random_gauge_word};
use nct::{CurvatureClass, Connection, MultiIndex, ScalarMatrix, ThetaMatrix, TorusElement};

type C = Complex<f64>;

fn theta_strategy() -> impl Strategy<Value = ThetaMatrix<f64>> {
    (2usize..=4).prop_flat_map(|dim| {
        prop::collection::vec(-0.99f64..0.99, dim * (dim - 1) / 2)
            .prop_map(move |upper| ThetaMatrix::from_upper(dim, &upper).unwrap())
    })
}

fn with_indices() -> impl Strategy<Value = (ThetaMatrix<f64>, MultiIndex, MultiIndex, MultiIndex)> {
    theta_strategy().prop_flat_map(|t| {
        let dim = t.dim();
        (Just(t), index(dim), index(dim), index(dim))
    })
}

fn index(dim: usize) -> impl Strategy<Value = MultiIndex> {
    prop::collection::vec(-6i32..=6, dim).prop_map(|v| MultiIndex::new(&v))
}

fn idiag(vals: &[f64]) -> ScalarMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_vec(vals.iter().map(|&v| C::new(0.0, v)).collect()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phase_is_a_bicharacter((theta, a, b, c) in with_indices()) {
        let lhs = phase(&theta, &(&a + &b), &c).unwrap();
        let rhs = phase(&theta, &a, &c).unwrap() * phase(&theta, &b, &c).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-12);
        prop_assert!((phase(&theta, &a, &b).unwrap().norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn monomials_multiply_by_phase((theta, a, b, _c) in with_indices()) {
        let theta = Arc::new(theta);
        let one = C::new(1.0, 0.0);
        let prod = TorusElement::monomial(&theta, a.clone(), one)
            .multiply(&TorusElement::monomial(&theta, b.clone(), one))
            .unwrap();
        let want = TorusElement::monomial(&theta, &a + &b, phase(&theta, &a, &b).unwrap());
        prop_assert!(prod.approx_eq(&want, 1e-14));
    }

    #[test]
    fn trace_of_star_square_is_l2_norm(theta in theta_strategy(), seed in any::<u64>()) {
        let theta = Arc::new(theta);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_element(&mut rng, &theta, 7, 4);
        let t = a.adjoint().multiply(&a).unwrap().trace();
        prop_assert!((t.re - a.l2_norm_sq()).abs() < 1e-12 && t.im.abs() < 1e-12);
        prop_assert!(a.adjoint().adjoint().approx_eq(&a, 1e-14));
    }

    #[test]
    fn gauge_action_composes(theta in theta_strategy(), seed in any::<u64>(), n in 1usize..=2) {
        let theta = Arc::new(theta);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let conn = random_connection(&mut rng, &theta, n, 2, 1);
        let u = random_gauge_word(&mut rng, &theta, n, 2);
        let v = random_gauge_word(&mut rng, &theta, n, 2);
        let step = conn.gauge_transform(&v, 1e-10).unwrap().gauge_transform(&u, 1e-10).unwrap();
        let once = conn.gauge_transform(&(&u * &v), 1e-10).unwrap();
        prop_assert!(step.distance(&once) < 1e-10);
        let back = once.gauge_transform(&(&u * &v).mat_adjoint(), 1e-10).unwrap();
        prop_assert!(back.distance(&conn) < 1e-10);
    }

    #[test]
    fn curvature_is_gauge_covariant(theta in theta_strategy(), seed in any::<u64>(), n in 1usize..=2) {
        let theta = Arc::new(theta);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let conn = random_connection(&mut rng, &theta, n, 2, 1);
        let u = random_gauge_word(&mut rng, &theta, n, 2);
        let moved = conn.gauge_transform(&u, 1e-10).unwrap();
        let th = conn.curvature(0, 1).unwrap();
        let want = u.mat_multiply(&th).unwrap().mat_multiply(&u.mat_adjoint()).unwrap();
        prop_assert!(moved.curvature(0, 1).unwrap().approx_eq(&want, 1e-10));
        prop_assert!(conn.curvature(1, 0).unwrap().approx_eq(&th.scale(C::new(-1.0, 0.0)), 0.0));
    }

    #[test]
    fn constant_connections_are_flat(vals in prop::collection::vec(-2.0f64..2.0, 6), theta in theta_strategy()) {
        let theta = Arc::new(theta);
        let dim = theta.dim();
        let lambdas: Vec<_> = (0..dim).map(|k| idiag(&[vals[k], vals[(k + 3) % 6]])).collect();
        let conn = Connection::constant(&theta, &lambdas, 1e-12).unwrap();
        prop_assert_eq!(conn.classify_curvature(1e-12).classification, CurvatureClass::Zero);
        prop_assert!(conn.yang_mills() == 0.0);
    }

    #[test]
    fn canonical_points_lie_in_unit_cube(vals in prop::collection::vec(-10.0f64..10.0, 1..=5)) {
        let n = vals.len();
        let shifted: Vec<f64> = vals.iter().map(|v| v * 0.5 - 1.0).collect();
        let p = canonicalize(&[idiag(&vals), idiag(&shifted)], 1e-9).unwrap();
        prop_assert_eq!(p.n(), n);
        for row in p.coords() {
            prop_assert!(row.iter().all(|&x| (0.0..1.0).contains(&x)));
        }
        prop_assert!(p.coords().windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(equivalent(&p, &p, 0.0).unwrap());
    }

    #[test]
    fn equivalence_is_symmetric(a in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 2), 1..=4),
                                shift in -3i32..=3) {
        let p = ModuliPoint::new(a.clone()).unwrap();
        let mut b: Vec<Vec<f64>> = a.iter().rev().cloned().collect();
        b[0][0] += shift as f64;
        let q = ModuliPoint::new(b).unwrap();
        prop_assert!(equivalent(&p, &q, 1e-9).unwrap());
        prop_assert!(equivalent(&q, &p, 1e-9).unwrap());
    }

    #[test]
    fn circular_distance_is_a_metric(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0) {
        let d = circular_distance(a, b);
        prop_assert!((0.0..=0.5).contains(&d));
        prop_assert!((d - circular_distance(b, a)).abs() < 1e-12);
        prop_assert!(d <= circular_distance(a, c) + circular_distance(c, b) + 1e-12);
    }

    #[test]
    fn dual_of_dual_is_minus_g(g in prop::collection::vec(-2.0f64..2.0, 4)) {
        let m = DMatrix::from_row_slice(2, 2, &g);
        prop_assume!(m.determinant().abs() > 0.2);
        let lat = HeisenbergLattice::new(1, m.clone()).unwrap();
        let dd = dual_lattice(&dual_lattice(&lat).unwrap()).unwrap();
        prop_assert!((dd.generators() + &m).abs().max() < 1e-10);
        let t = theta_of(&lat);
        prop_assert!((0.0..1.0).contains(&t.get(0, 1)));
        prop_assert_eq!(t.get(1, 0), -t.get(0, 1));
    }
}
