use equinuc_core::algebras::{build_action, center, diagonal, full_matrix, is_positive, span_closure};
use equinuc_core::cpmaps::{choi_min_eigenvalue, LinearMapOp};
use equinuc_core::fixtures;
use equinuc_core::linalg::{min_hermitian_eigenvalue, norm};
use equinuc_core::random::{random_combination, random_unitary, seeded};
use equinuc_core::{ActionDescriptor, CrossedSystem, FiniteGroup, State, ToleranceConfig};
use proptest::prelude::*;

fn systems() -> Vec<CrossedSystem> {
    vec![
        fixtures::z2_swap().unwrap(),
        fixtures::s3_sign_swap().unwrap(),
        fixtures::m2_swap().unwrap(),
        fixtures::cyclic_translation(3).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn center_commutes_with_the_algebra(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let x = random_unitary(&mut rng, 3);
        let a = span_closure(3, &[x.matmul(&equinuc_core::ComplexMatrix::real_diag(&[1.0, 1.0, 2.0])).matmul(&x.adjoint())]).unwrap();
        let z = center(&a).unwrap();
        for _ in 0..50 {
            let c = random_combination(&mut rng, z.basis());
            let b = random_combination(&mut rng, a.basis());
            prop_assert!(c.matmul(&b).max_abs_diff(&b.matmul(&c)) <= 1e-9);
        }
    }

    #[test]
    fn automorphisms_preserve_positivity(seed in any::<u64>(), which in 0usize..4) {
        let sys = &systems()[which];
        let tols = ToleranceConfig::default();
        let mut rng = seeded(seed);
        let y = sys.random_algebra_element(&mut rng);
        let positive = y.adjoint().matmul(&y);
        for s in sys.group().elements() {
            prop_assert!(is_positive(&sys.alpha(s, &positive), &tols).pass);
        }
    }

    #[test]
    fn states_satisfy_cauchy_schwarz(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let a = full_matrix(3).unwrap();
        let w = random_unitary(&mut rng, 3);
        let density = w.conjugate(&equinuc_core::ComplexMatrix::real_diag(&[0.6, 0.3, 0.1]));
        let rho = State::from_density(&a, &density, &ToleranceConfig::default()).unwrap();
        for _ in 0..20 {
            let x = random_combination(&mut rng, a.basis());
            let y = random_combination(&mut rng, a.basis());
            let lhs = rho.evaluate(&y.adjoint().matmul(&x)).norm_sqr();
            let rhs = rho.evaluate(&x.adjoint().matmul(&x)).re * rho.evaluate(&y.adjoint().matmul(&y)).re;
            prop_assert!(lhs <= rhs + 1e-9 * (1.0 + rhs));
        }
    }

    #[test]
    fn g_act_is_isometric(seed in any::<u64>(), which in 0usize..4) {
        let sys = &systems()[which];
        let mut rng = seeded(seed);
        let x = sys.random_element(&mut rng);
        let before = sys.norm(&x);
        for r in sys.group().elements() {
            let after = sys.norm(&sys.g_act(r, &x).unwrap());
            prop_assert!((before - after).abs() <= 1e-9);
        }
    }
}

#[test]
fn expectation_is_completely_positive_and_faithful() {
    for sys in systems() {
        let tols = *sys.tolerances();
        let e = LinearMapOp::from_fn(sys.crossed_algebra().clone(), sys.ambient_dim(), |m| {
            sys.pi(&sys.expectation(&sys.coefficients(m)))
        })
        .unwrap();
        assert!(choi_min_eigenvalue(&e, &tols) >= -tols.psd_tol);
        for b in sys.crossed_algebra().basis() {
            let x = sys.coefficients(b);
            let xx = sys.mul(&sys.adjoint(&x), &x);
            assert!(norm(&sys.expectation(&xx)) > 1e-6);
        }
    }
}

#[test]
fn translation_crossed_products_are_full_matrix_algebras() {
    for n in 1..=6 {
        let sys = fixtures::cyclic_translation(n).unwrap();
        assert_eq!(sys.crossed_algebra().dim(), n * n);
        assert_eq!(center(sys.crossed_algebra()).unwrap().dim(), 1);
    }
}

#[test]
fn trivial_actions_have_commutative_crossed_products_for_abelian_groups() {
    let g = FiniteGroup::cyclic(4).unwrap();
    let a = diagonal(2).unwrap();
    let tols = ToleranceConfig::default();
    let alpha = build_action(&g, &a, &ActionDescriptor::Trivial, &tols).unwrap();
    let sys = CrossedSystem::new(a, g, alpha, tols).unwrap();
    let z = center(sys.crossed_algebra()).unwrap();
    assert_eq!(z.dim(), sys.crossed_algebra().dim());
    let lowest = min_hermitian_eigenvalue(&sys.represent(&sys.one()), 1e-9).unwrap();
    assert!((lowest - 1.0).abs() < 1e-12);
}
