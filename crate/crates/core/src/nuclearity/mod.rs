//! Amenability fields and their defects, the factorization witness through
//! `M_F(A)`, the nuclearity driver in module and comodule form, the
//! normalization experiment, invariant states and positive definite
//! functions, witness transformations, and cb-norm bounds.

mod calculus;
mod driver;
mod field;
mod invariant;
mod witness;

pub use calculus::{
    certified_cb_options, expectation_cb_check, lambda_bound_check, witness_lambda_check, witness_transform,
    LambdaReport, TransformKind, TransformOutcome,
};
pub use driver::{run_nuclearity_check, standard_context, witness_certificates, NuclearityOptions, NuclearityReport};
pub use field::{build_field, defect, AmenabilityField, FieldDescriptor};
pub use invariant::{
    check_trace_property, expectation_map, pd_function, perturbed_identity, random_ucp_map, rho_prime, PDFunction,
};
pub use witness::{
    ambient_window, build_witness, coefficient_basis, defect_sweep, factorization_error, max_basis_error,
    normalization_experiment, psi_coefficients, witness_identities, NormalizationRecord, NuclearityMode, SweepRow,
    Witness, NORMALIZATION_TOL,
};
