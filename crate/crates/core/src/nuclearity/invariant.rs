use rand::Rng;

use crate::algebras::{check_invariant_state, State};
use crate::check::CheckResult;
use crate::cpmaps::{verify_cp, CpMode, LinearMapOp};
use crate::crossed::CrossedSystem;
use crate::error::{Error, Result};
use crate::groups::FiniteGroup;
use crate::linalg::{min_hermitian_eigenvalue, norm, ComplexMatrix, ToleranceConfig, C64, ONE};
use crate::random::{random_simplex, random_unit_vector, seeded};

/// `ρ' = ρ ∘ 𝔼` on the crossed product, for an `α`-invariant state `ρ`.
pub fn rho_prime(sys: &CrossedSystem, rho: &State) -> Result<State> {
    let tols = sys.tolerances();
    let invariant = check_invariant_state(rho, sys.group(), sys.action(), tols);
    if !invariant.pass {
        return Err(Error::NotInvariant {
            residual: invariant.value,
        });
    }
    let values = sys
        .crossed_algebra()
        .basis()
        .iter()
        .map(|b| rho.evaluate(&sys.expectation(&sys.coefficients(b))))
        .collect();
    State::from_values(sys.crossed_algebra(), values, tols)
}

/// `max |ρ'(x λ_t) − ρ'(λ_t x)|` over random `x` and every `t ∈ G`.
pub fn check_trace_property(sys: &CrossedSystem, rho_prime: &State, trials: usize, seed: u64) -> CheckResult {
    let mut rng = seeded(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let x = sys.represent(&sys.random_element(&mut rng));
        for t in sys.group().elements() {
            let l = sys.lambda(t);
            let diff = rho_prime.evaluate(&x.matmul(l)) - rho_prime.evaluate(&l.matmul(&x));
            worst = worst.max(diff.norm());
        }
    }
    CheckResult::residual("trace-property", worst, sys.tolerances().identity_tol)
}

/// `𝔼` as a map on the represented crossed product: `x ↦ π(𝔼(x))`.
pub fn expectation_map(sys: &CrossedSystem) -> LinearMapOp {
    LinearMapOp::from_fn(sys.crossed_algebra().clone(), sys.ambient_dim(), |m| {
        sys.pi(&sys.expectation(&sys.coefficients(m)))
    })
    .expect("basis images have the ambient size")
}

/// `ω(s) = ρ'(Φ(s) s⁻¹)` extracted from a u.c.p. map `Φ`, together with the
/// distances `‖Φ(s) − s‖`.
#[derive(Debug, Clone)]
pub struct PDFunction {
    group: FiniteGroup,
    values: Vec<C64>,
    distances: Vec<f64>,
}

pub fn pd_function(sys: &CrossedSystem, phi: &LinearMapOp, rho: &State) -> Result<PDFunction> {
    let tols = sys.tolerances();
    if phi.domain().dim() != sys.crossed_algebra().dim() || phi.codomain_dim() != sys.ambient_dim() {
        return Err(Error::InvalidInput("the map must act on the crossed product".into()));
    }
    let ucp = verify_cp(phi, CpMode::Ucp, tols)?;
    if !ucp.pass {
        return Err(Error::NotUcp(
            ucp.detail.unwrap_or_else(|| format!("worst excess {:.3e}", ucp.value)),
        ));
    }
    let rho_prime = rho_prime(sys, rho)?;
    let mut values = Vec::with_capacity(sys.group().order());
    let mut distances = Vec::with_capacity(sys.group().order());
    for s in sys.group().elements() {
        let l = sys.lambda(s);
        let image = phi.apply(l);
        values.push(rho_prime.evaluate(&image.matmul(&l.adjoint())));
        distances.push(norm(&(&image - l)));
    }
    Ok(PDFunction {
        group: sys.group().clone(),
        values,
        distances,
    })
}

impl PDFunction {
    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    /// `[ω(s_j⁻¹ s_i)]_{i,j}` over all of `G`.
    pub fn gram(&self) -> ComplexMatrix {
        let g = &self.group;
        ComplexMatrix::from_fn(g.order(), g.order(), |i, j| self.values[g.mul(g.inv(j), i)])
    }

    /// `max_s |ω(s) − 1|`.
    pub fn max_deviation(&self) -> f64 {
        self.values.iter().map(|w| (w - ONE).norm()).fold(0.0, f64::max)
    }

    /// Positive definiteness, `ω(e) = 1`, and `|ω(s) − 1| ≤ ‖Φ(s) − s‖`.
    pub fn checks(&self, tols: &ToleranceConfig) -> Vec<CheckResult> {
        let gram_min = min_hermitian_eigenvalue(&self.gram(), tols.identity_tol)
            .unwrap_or_else(|_| -self.gram().hermitian_defect());
        let unit = (self.values[self.group.identity()] - ONE).norm();
        let excess = self
            .values
            .iter()
            .zip(&self.distances)
            .map(|(w, d)| (w - ONE).norm() - d)
            .fold(f64::NEG_INFINITY, f64::max);
        vec![
            CheckResult::lower_bound("pd-function/gram-min-eig", gram_min, tols.psd_tol),
            CheckResult::residual("pd-function/unit", unit, tols.identity_tol),
            CheckResult::residual("pd-function/bound", excess.max(0.0), tols.identity_tol)
                .with_detail(format!("max |ω(s) - 1| = {:.6e}", self.max_deviation())),
        ]
    }
}

/// A random u.c.p. map on the crossed product: a convex mixture of the
/// identity, `Ad u` for a unitary `u` of the crossed product, `𝔼`, and a
/// Schur multiplier `a s ↦ ω(s) a s` by a normalized positive definite `ω`.
pub fn random_ucp_map(sys: &CrossedSystem, rng: &mut impl Rng) -> Result<LinearMapOp> {
    let crossed = sys.crossed_algebra();
    let n = sys.ambient_dim();
    let y = sys.represent(&sys.random_element(rng));
    let h = &y + &y.adjoint();
    let i = ComplexMatrix::identity(n).scale(C64::new(0.0, 1.0));
    let u = (&h - &i).matmul(&(&h + &i).inverse()?);

    let xi = random_unit_vector(rng, sys.group().order());
    let g = sys.group();
    let omega: Vec<C64> = g
        .elements()
        .map(|s| (0..g.order()).map(|v| xi[g.mul(s, v)].conj() * xi[v]).sum())
        .collect();

    let w = random_simplex(rng, 4);
    let expectation = expectation_map(sys);
    LinearMapOp::from_fn(crossed.clone(), n, |m| {
        let x = sys.coefficients(m);
        let schur = omega.iter().enumerate().fold(sys.zero(), |acc, (s, c)| {
            acc.add(&sys.monomial(x.coeff(s).scale(*c), s))
        });
        let mut out = m.scale_real(w[0]);
        out += &u.conjugate(m).scale_real(w[1]);
        out += &expectation.apply(m).scale_real(w[2]);
        out += &sys.represent(&schur).scale_real(w[3]);
        out
    })
}

/// `(1 − ε) id + ε Φ` with `Φ` from [`random_ucp_map`].
pub fn perturbed_identity(sys: &CrossedSystem, rng: &mut impl Rng, epsilon: f64) -> Result<LinearMapOp> {
    let id = LinearMapOp::identity(sys.crossed_algebra());
    id.scale(1.0 - epsilon).add(&random_ucp_map(sys, rng)?.scale(epsilon))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn uniform(sys: &CrossedSystem) -> State {
        State::normalized_trace(sys.algebra()).unwrap()
    }

    #[test]
    fn rho_prime_on_z2() {
        let sys = fixtures::z2_swap().unwrap();
        let rp = rho_prime(&sys, &uniform(&sys)).unwrap();
        let x = sys
            .element(vec![
                ComplexMatrix::real_diag(&[2.0, 6.0]),
                ComplexMatrix::real_diag(&[5.0, 7.0]),
            ])
            .unwrap();
        assert!((rp.evaluate(&sys.represent(&x)) - C64::new(4.0, 0.0)).norm() < 1e-14);
        let a = ComplexMatrix::real_diag(&[1.0, -3.0]);
        assert!((rp.evaluate(&sys.pi(&a)) - uniform(&sys).evaluate(&a)).norm() < 1e-14);
    }

    #[test]
    fn non_invariant_states_are_rejected() {
        let sys = fixtures::z2_swap().unwrap();
        let rho = State::from_density(sys.algebra(), &ComplexMatrix::real_diag(&[0.9, 0.1]), sys.tolerances()).unwrap();
        assert!(matches!(rho_prime(&sys, &rho), Err(Error::NotInvariant { .. })));
    }

    #[test]
    fn trace_property() {
        for sys in [fixtures::z2_swap().unwrap(), fixtures::m2_swap().unwrap()] {
            let rp = rho_prime(&sys, &uniform(&sys)).unwrap();
            let check = check_trace_property(&sys, &rp, 100, 9);
            assert!(check.value <= 1e-12, "{}", check.value);
        }
    }

    #[test]
    fn identity_and_expectation_extract_the_expected_functions() {
        let sys = fixtures::z2_swap().unwrap();
        let rho = uniform(&sys);
        let id = LinearMapOp::identity(sys.crossed_algebra());
        let omega = pd_function(&sys, &id, &rho).unwrap();
        assert!(omega.values().iter().all(|w| (w - ONE).norm() < 1e-14));
        assert!(omega.checks(sys.tolerances()).iter().all(|c| c.pass));

        let omega = pd_function(&sys, &expectation_map(&sys), &rho).unwrap();
        assert!((omega.values()[0] - ONE).norm() < 1e-14);
        assert!(omega.values()[1].norm() < 1e-14);
        assert!(omega.gram().max_abs_diff(&ComplexMatrix::identity(2)) < 1e-14);
    }

    #[test]
    fn random_ucp_maps_are_ucp_and_satisfy_the_bound() {
        let sys = fixtures::z2_swap().unwrap();
        let rho = uniform(&sys);
        let mut rng = seeded(31);
        for _ in 0..10 {
            let phi = perturbed_identity(&sys, &mut rng, 0.3).unwrap();
            assert!(verify_cp(&phi, CpMode::Ucp, sys.tolerances()).unwrap().pass);
            let omega = pd_function(&sys, &phi, &rho).unwrap();
            for c in omega.checks(sys.tolerances()) {
                assert!(c.pass, "{c:?}");
            }
        }
    }

    #[test]
    fn non_ucp_maps_are_rejected() {
        let sys = fixtures::z2_swap().unwrap();
        let twice = LinearMapOp::identity(sys.crossed_algebra()).scale(2.0);
        assert!(matches!(
            pd_function(&sys, &twice, &uniform(&sys)),
            Err(Error::NotUcp(_))
        ));
    }
}
