use equinuc_core::algebras::State;
use equinuc_core::cpmaps::validate_certificate;
use equinuc_core::fixtures;
use equinuc_core::linalg::ONE;
use equinuc_core::nuclearity::{
    build_field, build_witness, defect_sweep, factorization_error, pd_function, perturbed_identity, standard_context,
    witness_certificates, witness_identities, FieldDescriptor,
};
use equinuc_core::random::seeded;
use equinuc_core::{FiniteGroup, NuclearityMode};
use proptest::prelude::*;

fn subset(n: usize, mask: u32) -> Vec<String> {
    let mask = mask % ((1u32 << n) - 1) + 1;
    (0..n).filter(|i| mask & (1 << i) != 0).map(|i| i.to_string()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn error_is_bounded_by_the_root_defect(n in 1usize..=8, mask in any::<u32>(), scale in 0.1f64..3.0) {
        let sys = fixtures::scalar(FiniteGroup::cyclic(n).unwrap()).unwrap();
        let support = subset(n, mask);
        let field = build_field(&sys, &FieldDescriptor::Truncated { support }).unwrap();
        let w = build_witness(&field, None, false).unwrap();
        let a = equinuc_core::ComplexMatrix::identity(1).scale_real(scale);
        for s in sys.group().elements() {
            let err = factorization_error(&w, &sys.monomial(a.clone(), s));
            prop_assert!(err <= scale * field.defect(s).sqrt() + 1e-9, "s = {s}: {err} vs defect {}", field.defect(s));
        }
    }
}

#[test]
fn sweep_errors_decrease_to_zero() {
    for n in 1..=6 {
        let sys = fixtures::scalar(FiniteGroup::cyclic(n).unwrap()).unwrap();
        let rows = defect_sweep(&sys).unwrap();
        for pair in rows.windows(2) {
            for s in 0..n {
                assert!(pair[1].errors[s] <= pair[0].errors[s] + 1e-12, "n = {n}, s = {s}");
            }
        }
        let last = rows.last().unwrap();
        assert!(last.max_error <= 1e-10);
        assert!(last.max_defect <= 1e-12);
    }
}

#[test]
fn proof_identities_hold_tightly() {
    for sys in [fixtures::z2_swap().unwrap(), fixtures::s3_sign_swap().unwrap()] {
        let field = build_field(&sys, &FieldDescriptor::Constant).unwrap();
        let w = build_witness(&field, None, false).unwrap();
        for mode in [NuclearityMode::Module, NuclearityMode::Comodule] {
            for check in witness_identities(&w, mode, 50, 3).unwrap() {
                assert!(check.value <= 1e-12, "{}: {}", check.name, check.value);
            }
        }
    }
}

#[test]
fn extracted_functions_are_one_at_the_identity() {
    let sys = fixtures::m2_swap().unwrap();
    let rho = State::normalized_trace(sys.algebra()).unwrap();
    let mut rng = seeded(17);
    for _ in 0..10 {
        let phi = perturbed_identity(&sys, &mut rng, 0.5).unwrap();
        let omega = pd_function(&sys, &phi, &rho).unwrap();
        assert!((omega.values()[sys.group().identity()] - ONE).norm() <= 1e-12);
        assert!(omega.checks(sys.tolerances()).iter().all(|c| c.pass));
    }
}

#[test]
fn witness_maps_carry_validating_certificates() {
    let sys = fixtures::z2_swap().unwrap();
    let field = build_field(&sys, &FieldDescriptor::Constant).unwrap();
    let w = build_witness(&field, None, false).unwrap();
    let ctx = standard_context(&w, 0).unwrap();
    for mode in [NuclearityMode::Module, NuclearityMode::Comodule] {
        for (name, cert) in witness_certificates(&w, mode) {
            let check = validate_certificate(&cert, &ctx).unwrap();
            assert!(check.pass, "{name}: {check:?}");
        }
    }
}
