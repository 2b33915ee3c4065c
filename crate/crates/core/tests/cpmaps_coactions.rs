use equinuc_core::coactions::{delta, delta_algebra, delta_window, delta_window_matrix};
use equinuc_core::cpmaps::certificate::BoundMap;
use equinuc_core::cpmaps::{cb_norm, choi_min_eigenvalue, compress_by, validate_certificate, CbNormOptions};
use equinuc_core::crossed::WindowedMatrix;
use equinuc_core::linalg::{min_hermitian_eigenvalue, norm};
use equinuc_core::random::{random_combination, random_matrix, seeded};
use equinuc_core::{
    fixtures, Certificate, CertificateContext, CrossedSystem, GroupTuple, LinearMapOp, ToleranceConfig, Window,
};
use proptest::prelude::*;

fn systems() -> Vec<CrossedSystem> {
    vec![
        fixtures::z2_swap().unwrap(),
        fixtures::s3_sign_swap().unwrap(),
        fixtures::m2_swap().unwrap(),
    ]
}

/// A random c.p. map on the crossed product: `x ↦ Σ_j V_j x V_j*`.
fn random_cp(sys: &CrossedSystem, seed: u64) -> LinearMapOp {
    let mut rng = seeded(seed);
    let n = sys.ambient_dim();
    let vs: Vec<_> = (0..2).map(|_| random_matrix(&mut rng, n, n)).collect();
    LinearMapOp::from_fn(sys.crossed_algebra().clone(), n, |m| {
        vs.iter().fold(equinuc_core::ComplexMatrix::zeros(n, n), |acc, v| {
            &acc + &v.conjugate(m)
        })
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn psd_choi_means_amplifications_stay_positive(seed in any::<u64>(), which in 0usize..3, k in 1usize..4) {
        let sys = &systems()[which];
        let theta = random_cp(sys, seed);
        let tols = sys.tolerances();
        prop_assert!(choi_min_eigenvalue(&theta, tols) >= -1e-8);
        let mut rng = seeded(seed ^ 1);
        let d = sys.ambient_dim();
        for _ in 0..10 {
            // Positive elements of B ⊗ M_k: columns of B-valued row vectors.
            let row: Vec<_> = (0..k).map(|_| sys.represent(&sys.random_element(&mut rng))).collect();
            let x = equinuc_core::ComplexMatrix::from_fn(d * k, d * k, |r, c| {
                let (i, p) = (r / k, r % k);
                let (j, q) = (c / k, c % k);
                row[p].adjoint().matmul(&row[q])[(i, j)]
            });
            let out = theta.amplify(&x, k);
            let lowest = min_hermitian_eigenvalue(&out.hermitian_part(), 1.0).unwrap();
            prop_assert!(lowest >= -1e-8 * (1.0 + norm(&out)));
        }
    }

    #[test]
    fn compressions_compose(seed in any::<u64>(), which in 0usize..3) {
        let sys = &systems()[which];
        let mut rng = seeded(seed);
        let n = sys.ambient_dim();
        let x1 = random_matrix(&mut rng, n, n);
        let x2 = random_matrix(&mut rng, n, n);
        let domain = sys.crossed_algebra();
        let outer = compress_by(&equinuc_core::algebras::full_matrix(n).unwrap(), &x1).unwrap();
        let composed = outer.compose(&compress_by(domain, &x2).unwrap()).unwrap();
        let direct = compress_by(domain, &x1.matmul(&x2)).unwrap();
        for _ in 0..5 {
            let b = random_combination(&mut rng, domain.basis());
            prop_assert!(composed.apply(&b).max_abs_diff(&direct.apply(&b)) <= 1e-10 * (1.0 + norm(&direct.apply(&b))));
        }
    }

    #[test]
    fn cb_lower_bound_never_exceeds_the_unit_norm(seed in any::<u64>(), which in 0usize..2) {
        let sys = &systems()[which];
        let theta = random_cp(sys, seed);
        let options = CbNormOptions { restarts: 6, iterations: 10, max_level: Some(2), seed };
        let cb = cb_norm(&theta, &options, sys.tolerances());
        let unit_norm = norm(&theta.unit_image().unwrap());
        prop_assert!(cb.lower <= unit_norm + 1e-8);
        prop_assert!((cb.value() - unit_norm).abs() <= 1e-8 * (1.0 + unit_norm));
    }

    #[test]
    fn delta_is_isometric(seed in any::<u64>(), which in 0usize..3) {
        let sys = &systems()[which];
        let x = sys.random_element(&mut seeded(seed));
        let before = sys.norm(&x);
        prop_assert!((norm(&delta(sys, &x)) - before).abs() <= 1e-9 * (1.0 + before));
    }

    #[test]
    fn delta_window_respects_adjoints(seed in any::<u64>(), which in 0usize..3) {
        let sys = &systems()[which];
        let g = sys.group();
        let w = Window::new(vec![
            GroupTuple::singleton(g.identity()),
            GroupTuple::new(vec![g.order() - 1, g.identity()]).unwrap(),
        ]).unwrap().translation_closure(g).unwrap();
        let mut rng = seeded(seed);
        let blocks = (0..w.len() * w.len()).map(|_| sys.random_algebra_element(&mut rng)).collect();
        let m = WindowedMatrix::new(w.clone(), blocks).unwrap();
        let left = delta_window_matrix(sys, &w, &m.adjoint().to_matrix()).unwrap();
        let right = delta_window_matrix(sys, &w, &m.to_matrix()).unwrap().adjoint();
        prop_assert!(left.max_abs_diff(&right) <= 1e-12);
        let direct = delta_window(sys, &m.adjoint()).unwrap();
        prop_assert_eq!(direct.window(), &w);
    }
}

#[test]
fn delta_restricts_to_delta_a() {
    for sys in systems() {
        let mut rng = seeded(5);
        for _ in 0..20 {
            let a = sys.random_algebra_element(&mut rng);
            let x = sys.monomial(a.clone(), sys.group().identity());
            let via_pi = delta(&sys, &x);
            let expected = sys
                .pi(&a)
                .kron(&equinuc_core::ComplexMatrix::identity(sys.group().order()));
            assert_eq!(via_pi.max_abs_diff(&expected), 0.0);
            let expected = a.kron(&equinuc_core::ComplexMatrix::identity(sys.group().order()));
            assert_eq!(delta_algebra(&sys, &a).max_abs_diff(&expected), 0.0);
        }
    }
}

#[test]
fn failing_children_sink_sum_and_compose_nodes() {
    let sys = fixtures::m2_swap().unwrap();
    let tols = ToleranceConfig::default();
    let crossed = sys.crossed_algebra();
    let mut ctx = CertificateContext::new(sys.group().clone(), tols);
    ctx.modules
        .insert("crossed".into(), equinuc_core::coactions::crossed_module(&sys));
    let bind = |map: LinearMapOp| BoundMap {
        map,
        domain: "crossed".into(),
        codomain: "crossed".into(),
    };
    ctx.maps.insert("identity".into(), bind(LinearMapOp::identity(crossed)));
    ctx.maps
        .insert("transpose".into(), bind(LinearMapOp::transpose(crossed).unwrap()));
    let leaf = |name: &str| Certificate::ModuleMap { map: name.into() };
    let good = validate_certificate(&leaf("identity"), &ctx).unwrap();
    assert!(good.pass);
    let bad = validate_certificate(&leaf("transpose"), &ctx).unwrap();
    assert!(!bad.pass);
    let sum = Certificate::Sum {
        children: vec![leaf("identity"), leaf("transpose")],
    };
    assert!(!validate_certificate(&sum, &ctx).unwrap().pass);
    for (outer, inner) in [("identity", "transpose"), ("transpose", "identity")] {
        let compose = Certificate::Compose {
            outer: Box::new(leaf(outer)),
            inner: Box::new(leaf(inner)),
        };
        assert!(!validate_certificate(&compose, &ctx).unwrap().pass);
    }
}
