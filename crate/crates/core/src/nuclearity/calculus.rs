use serde::{Deserialize, Serialize};

use super::invariant::{expectation_map, random_ucp_map};
use super::witness::{max_basis_error, Witness};
use crate::algebras::StarAlgebra;
use crate::check::CheckResult;
use crate::coactions::crossed_module;
use crate::cpmaps::{cb_norm, check_equivariance, verify_cp, CbNormOptions, CpMode, EquivarianceMode, LinearMapOp};
use crate::crossed::CrossedSystem;
use crate::error::{Error, Result};
use crate::linalg::{norm, ToleranceConfig};
use crate::random::seeded;

/// How to transform a witness.
#[derive(Debug, Clone)]
pub enum TransformKind {
    /// Restrict to the span of the given crossed-product basis elements
    /// (index `s * dim(A) + i`).
    Restrict { indices: Vec<usize> },
    /// Approximate `σ ∘ τ` by `σ ∘ ψ ∘ φ_F ∘ τ`.
    Compose { sigma: LinearMapOp, tau: LinearMapOp },
}

#[derive(Debug, Clone)]
pub struct TransformOutcome {
    /// The transformed approximating map.
    pub approximant: LinearMapOp,
    /// The map it approximates.
    pub target: LinearMapOp,
    pub original_max: f64,
    pub transformed_max: f64,
    pub checks: Vec<CheckResult>,
}

impl TransformOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub fn witness_transform(witness: &Witness, kind: &TransformKind) -> Result<TransformOutcome> {
    let sys = witness.system();
    let tols = *sys.tolerances();
    let crossed = sys.crossed_algebra();
    match kind {
        TransformKind::Restrict { indices } => {
            let basis = indices
                .iter()
                .map(|&k| {
                    crossed
                        .basis()
                        .get(k)
                        .cloned()
                        .ok_or_else(|| Error::InvalidInput(format!("basis index {k} out of range")))
                })
                .collect::<Result<Vec<_>>>()?;
            let one = crossed.unit().cloned();
            let probe = StarAlgebra::from_basis_unchecked(sys.ambient_dim(), basis.clone(), None)?;
            let unit = one.filter(|u| probe.contains(u, tols.identity_tol));
            let sub = StarAlgebra::from_basis_unchecked(sys.ambient_dim(), basis, unit)?;
            check_submodule(sys, &sub, &tols)?;
            let approximant = LinearMapOp::from_fn(sub.clone(), sys.ambient_dim(), |m| witness.approximate(m))?;
            let target = LinearMapOp::identity(&sub);
            let transformed_max = max_difference(&approximant, &target);
            let original_max = max_basis_error(witness);
            let check = CheckResult::residual("transform/restrict", transformed_max - original_max, tols.identity_tol);
            Ok(TransformOutcome {
                approximant,
                target,
                original_max,
                transformed_max,
                checks: vec![check],
            })
        }
        TransformKind::Compose { sigma, tau } => {
            let module = crossed_module(sys);
            let mut checks = Vec::new();
            for (name, map) in [("sigma", sigma), ("tau", tau)] {
                if map.domain().dim() != crossed.dim() || map.codomain_dim() != sys.ambient_dim() {
                    return Err(Error::InvalidInput(format!("{name} must act on the crossed product")));
                }
                checks.push(verify_cp(map, CpMode::Ccp, &tols)?.renamed(&format!("transform/{name}-ccp")));
                for mode in [EquivarianceMode::Module, EquivarianceMode::Gmap] {
                    let check = check_equivariance(map, &module, &module, mode, &tols)?;
                    checks.push(check.renamed(&format!("transform/{name}-{}", mode.label())));
                }
            }
            let approximant = LinearMapOp::from_fn(crossed.clone(), sys.ambient_dim(), |m| {
                sigma.apply(&witness.approximate(&tau.apply(m)))
            })?;
            let target = sigma.compose(tau)?;
            let transformed_max = max_difference(&approximant, &target);
            let moved_max = tau
                .images()
                .iter()
                .map(|y| norm(&(&witness.approximate(y) - y)))
                .fold(0.0, f64::max);
            let original_max = max_basis_error(witness).max(moved_max);
            checks.push(CheckResult::residual(
                "transform/compose",
                transformed_max - original_max,
                tols.identity_tol,
            ));
            Ok(TransformOutcome {
                approximant,
                target,
                original_max,
                transformed_max,
                checks,
            })
        }
    }
}

fn max_difference(a: &LinearMapOp, b: &LinearMapOp) -> f64 {
    a.images()
        .iter()
        .zip(b.images())
        .map(|(x, y)| norm(&(x - y)))
        .fold(0.0, f64::max)
}

/// `C·b ⊆ C` for `b ∈ A` and `r·C ⊆ C` for `r ∈ G`.
fn check_submodule(sys: &CrossedSystem, sub: &StarAlgebra, tols: &ToleranceConfig) -> Result<()> {
    let mut worst: f64 = 0.0;
    for c in sub.basis() {
        for b in sys.algebra().basis() {
            worst = worst.max(sub.membership_residual(&c.matmul(&sys.pi(b))));
        }
        for r in sys.group().elements() {
            worst = worst.max(sub.membership_residual(&sys.lambda(r).conjugate(c)));
        }
    }
    if worst > tols.identity_tol {
        return Err(Error::NotSubmodule(format!("leaks out with residual {worst:.3e}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaReport {
    pub m1: f64,
    pub m2: f64,
    pub inner: f64,
    /// `cb(ψ_i ∘ Φ ∘ φ_i)` per pair.
    pub compositions: Vec<f64>,
    pub checks: Vec<CheckResult>,
}

/// Light settings for cb-norms of maps already certified c.p., where the
/// exact value `‖θ(1)‖` is used and the ascent only supplies a lower bound.
pub fn certified_cb_options(seed: u64) -> CbNormOptions {
    CbNormOptions {
        restarts: 4,
        iterations: 10,
        max_level: Some(2),
        seed,
    }
}

/// Verifies `cb(ψ_i ∘ Φ ∘ φ_i) ≤ m₁ m₂ M` with `m₁ = max cb(φ_i)`,
/// `m₂ = max cb(ψ_i)` and `M = cb(Φ)`.
pub fn lambda_bound_check(
    phis: &[LinearMapOp],
    psis: &[LinearMapOp],
    inner: &LinearMapOp,
    options: &CbNormOptions,
    tols: &ToleranceConfig,
) -> Result<LambdaReport> {
    if phis.len() != psis.len() || phis.is_empty() {
        return Err(Error::InvalidInput("need matching nonempty lists of maps".into()));
    }
    let certified = |name: String, map: &LinearMapOp| -> Result<f64> {
        let cp = verify_cp(map, CpMode::Cp, tols)?;
        if !cp.pass {
            return Err(Error::NotCp(format!(
                "{name}: Choi minimum eigenvalue {:.3e}",
                cp.value
            )));
        }
        Ok(cb_norm(map, options, tols).value())
    };
    let mut m1: f64 = 0.0;
    let mut m2: f64 = 0.0;
    for (i, (phi, psi)) in phis.iter().zip(psis).enumerate() {
        m1 = m1.max(certified(format!("phi[{i}]"), phi)?);
        m2 = m2.max(certified(format!("psi[{i}]"), psi)?);
    }
    let big_m = certified("inner".into(), inner)?;
    let bound = m1 * m2 * big_m;
    let mut compositions = Vec::with_capacity(phis.len());
    for (i, (phi, psi)) in phis.iter().zip(psis).enumerate() {
        let composed = psi.compose(&inner.compose(phi)?)?;
        compositions.push(certified(format!("composition[{i}]"), &composed)?);
    }
    let worst = compositions.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let check = CheckResult::residual("lambda/bound", worst - bound, tols.psd_tol).with_detail(format!(
        "m1 = {m1:.12}, m2 = {m2:.12}, M = {big_m:.12}, max composition = {worst:.12}"
    ));
    Ok(LambdaReport {
        m1,
        m2,
        inner: big_m,
        compositions,
        checks: vec![check],
    })
}

/// `max (cb(𝔼 ∘ Φ) − cb(Φ))` over random u.c.p. maps `Φ`.
pub fn expectation_cb_check(
    sys: &CrossedSystem,
    trials: usize,
    seed: u64,
    options: &CbNormOptions,
) -> Result<CheckResult> {
    let tols = sys.tolerances();
    let expectation = expectation_map(sys);
    let mut rng = seeded(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..trials {
        let phi = random_ucp_map(sys, &mut rng)?;
        let lhs = cb_norm(&expectation.compose(&phi)?, options, tols).value();
        let rhs = cb_norm(&phi, options, tols).value();
        worst = worst.max(lhs - rhs);
    }
    Ok(CheckResult::residual(
        "lambda/expectation",
        worst.max(0.0),
        tols.identity_tol,
    ))
}

/// The witness instance of the bound: `φ_F`, `ψ_F ∘ θ` and the identity of
/// `M_F(A)` in the middle.
pub fn witness_lambda_check(witness: &Witness, options: &CbNormOptions) -> Result<LambdaReport> {
    let tols = witness.system().tolerances();
    let inner = LinearMapOp::identity(witness.theta().domain());
    lambda_bound_check(
        std::slice::from_ref(witness.phi_f()),
        &[witness.downward()?],
        &inner,
        options,
        tols,
    )
}
