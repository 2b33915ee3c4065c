use serde::{Deserialize, Serialize};

use super::field::AmenabilityField;
use super::invariant::{expectation_map, rho_prime};
use super::witness::{build_witness, factorization_error, witness_identities, NuclearityMode, Witness};
use crate::algebras::State;
use crate::check::CheckResult;
use crate::coactions::{algebra_module, check_comap_pair, crossed_module, window_module};
use crate::cpmaps::certificate::BoundMap;
use crate::cpmaps::{
    check_equivariance, validate_certificate, Certificate, CertificateContext, EquivarianceMode, FamilyBinding,
    LinearMapOp,
};
use crate::crossed::{CrossedElement, CrossedSystem};
use crate::error::Result;
use crate::groups::Window;
use crate::linalg::C64;
use crate::random::{random_complex, random_unit_vector, seeded};

/// Binds the standard names used by witness certificates and certificate
/// fixtures.
///
/// Modules: `crossed`, `window` (on the witness's ambient window), `algebra`.
/// Maps: `phi`, `phi_f`, `theta` and `psi_f` from the witness; `E`,
/// `identity` and, when the crossed product is closed under transposition,
/// `transpose` on `crossed`; `inclusion: algebra → crossed` and
/// `E_a: crossed → algebra`. Families: `psi_family` (the translates `ψ_{rF}`)
/// and `psi_cofamily` (`{ψ_F}`). Elements: `x_crossed`, `positive_crossed`,
/// `pi_a`, `unit_crossed`, `p_f`, `x_witness`. Functionals on `crossed`:
/// `trace_state` and `random_functional`. Functionals on `C*_r(G)`:
/// `pd_positive`, `trivial` and `random`.
pub fn standard_context(witness: &Witness, seed: u64) -> Result<CertificateContext> {
    let sys = witness.system();
    let g = sys.group();
    let mut ctx = CertificateContext::new(g.clone(), *sys.tolerances());
    ctx.modules.insert("crossed".into(), crossed_module(sys));
    ctx.modules
        .insert("window".into(), window_module(sys, witness.ambient())?);
    ctx.modules.insert("algebra".into(), algebra_module(sys));

    let bind = |map: &LinearMapOp, domain: &str, codomain: &str| BoundMap {
        map: map.clone(),
        domain: domain.into(),
        codomain: codomain.into(),
    };
    let crossed = sys.crossed_algebra();
    ctx.maps.insert("phi".into(), bind(witness.phi(), "crossed", "window"));
    ctx.maps
        .insert("phi_f".into(), bind(witness.phi_f(), "crossed", "window"));
    ctx.maps
        .insert("theta".into(), bind(witness.theta(), "window", "window"));
    ctx.maps
        .insert("psi_f".into(), bind(witness.psi_f(), "window", "crossed"));
    ctx.maps
        .insert("E".into(), bind(&expectation_map(sys), "crossed", "crossed"));
    ctx.maps.insert(
        "identity".into(),
        bind(&LinearMapOp::identity(crossed), "crossed", "crossed"),
    );
    if let Ok(t) = LinearMapOp::transpose(crossed) {
        ctx.maps.insert("transpose".into(), bind(&t, "crossed", "crossed"));
    }
    let inclusion = LinearMapOp::from_fn(sys.algebra().clone(), sys.ambient_dim(), |a| sys.pi(a))?;
    ctx.maps
        .insert("inclusion".into(), bind(&inclusion, "algebra", "crossed"));
    let e_a = LinearMapOp::from_fn(crossed.clone(), sys.dim(), |m| sys.expectation(&sys.coefficients(m)))?;
    ctx.maps.insert("E_a".into(), bind(&e_a, "crossed", "algebra"));

    let index_action = g
        .elements()
        .map(|t| g.elements().map(|r| g.mul(t, r)).collect())
        .collect();
    ctx.families.insert(
        "psi_family".into(),
        FamilyBinding {
            members: witness.psi_family()?,
            domain: "window".into(),
            codomain: "crossed".into(),
            index_action: Some(index_action),
            index_map: None,
        },
    );
    ctx.families.insert(
        "psi_cofamily".into(),
        FamilyBinding {
            members: vec![witness.psi_f().clone()],
            domain: "window".into(),
            codomain: "crossed".into(),
            index_action: None,
            index_map: Some(vec![0]),
        },
    );

    let mut rng = seeded(seed);
    let x = sys.represent(&sys.random_element(&mut rng));
    let y = sys.represent(&sys.random_element(&mut rng));
    ctx.elements.insert("x_crossed".into(), x);
    ctx.elements.insert("positive_crossed".into(), y.adjoint().matmul(&y));
    ctx.elements
        .insert("pi_a".into(), sys.pi(&sys.random_algebra_element(&mut rng)));
    ctx.elements.insert(
        "unit_crossed".into(),
        crate::linalg::ComplexMatrix::identity(sys.ambient_dim()),
    );
    ctx.elements.insert("p_f".into(), witness.phi_f().codomain_unit());
    ctx.elements.insert("x_witness".into(), witness.x().clone());

    let trace = State::normalized_trace(sys.algebra())?;
    if let Ok(rp) = rho_prime(sys, &trace) {
        ctx.functionals.insert("trace_state".into(), rp.values().to_vec());
    }
    ctx.functionals.insert(
        "random_functional".into(),
        (0..crossed.dim()).map(|_| random_complex(&mut rng)).collect(),
    );

    let xi = random_unit_vector(&mut rng, g.order());
    let pd: Vec<C64> = g
        .elements()
        .map(|s| (0..g.order()).map(|v| xi[g.mul(s, v)].conj() * xi[v]).sum())
        .collect();
    ctx.group_functionals.insert("pd_positive".into(), pd);
    ctx.group_functionals
        .insert("trivial".into(), vec![C64::new(1.0, 0.0); g.order()]);
    ctx.group_functionals.insert(
        "random".into(),
        (0..g.order()).map(|_| random_complex(&mut rng)).collect(),
    );
    Ok(ctx)
}

/// The certificates carried by a witness: module-map leaves for `φ`, `φ_F`
/// and `θ`, the `ψ` family (or cofamily), and the composite
/// `scale · ψ ∘ θ ∘ φ_F`.
pub fn witness_certificates(witness: &Witness, mode: NuclearityMode) -> Vec<(String, Certificate)> {
    let leaf = |name: &str| Certificate::ModuleMap { map: name.into() };
    let psi = match mode {
        NuclearityMode::Module => Certificate::GFamilyLeaf {
            family: "psi_family".into(),
        },
        NuclearityMode::Comodule => Certificate::GCofamilyLeaf {
            family: "psi_cofamily".into(),
        },
    };
    let composite = Certificate::PositiveMultiple {
        factor: witness.scale(),
        member: None,
        child: Box::new(Certificate::Compose {
            outer: Box::new(Certificate::Compose {
                outer: Box::new(psi.clone()),
                inner: Box::new(leaf("theta")),
            }),
            inner: Box::new(leaf("phi_f")),
        }),
    };
    vec![
        ("phi".into(), leaf("phi")),
        ("phi_f".into(), leaf("phi_f")),
        ("theta".into(), leaf("theta")),
        ("psi".into(), psi),
        ("composite".into(), composite),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuclearityOptions {
    pub trials: usize,
    pub seed: u64,
    pub include_pre_factor: bool,
    #[serde(skip)]
    pub window: Option<Window>,
}

impl Default for NuclearityOptions {
    fn default() -> Self {
        Self {
            trials: 100,
            seed: 0,
            include_pre_factor: false,
            window: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuclearityReport {
    /// Factorization error per test element.
    pub errors: Vec<f64>,
    pub max_error: f64,
    /// Every check, named `<task>/<check>`.
    pub checks: Vec<CheckResult>,
}

impl NuclearityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Builds the witness for `field`, validates its certificates and
/// equivariance in the given mode, and compares the largest factorization
/// error over `test_set` with `epsilon`.
pub fn run_nuclearity_check(
    field: &AmenabilityField,
    test_set: &[CrossedElement],
    epsilon: f64,
    mode: NuclearityMode,
    options: &NuclearityOptions,
) -> Result<NuclearityReport> {
    let witness = build_witness(field, options.window.clone(), options.include_pre_factor)?;
    let sys: &CrossedSystem = witness.system();
    let tols = *sys.tolerances();
    let prefix = mode.task_name();
    let mut checks: Vec<CheckResult> = witness.verify()?;

    let crossed = crossed_module(sys);
    let window = window_module(sys, witness.ambient())?;
    let maps: [(&str, &LinearMapOp, _, _); 4] = [
        ("phi", witness.phi(), &crossed, &window),
        ("phi_f", witness.phi_f(), &crossed, &window),
        ("theta", witness.theta(), &window, &window),
        ("psi_f", witness.psi_f(), &window, &crossed),
    ];
    for (name, map, dom, cod) in maps {
        let mut modes = vec![EquivarianceMode::Module];
        match mode {
            NuclearityMode::Module if name == "phi" => modes.push(EquivarianceMode::Gmap),
            NuclearityMode::Comodule => modes.push(EquivarianceMode::Gcomap),
            _ => {}
        }
        for m in modes {
            let check = check_equivariance(map, dom, cod, m, &tols)?;
            checks.push(check.renamed(&format!("equivariance/{name}-{}", m.label())));
        }
    }

    checks.extend(witness_identities(&witness, mode, options.trials, options.seed)?);
    if mode == NuclearityMode::Comodule {
        checks.push(check_comap_pair(
            sys,
            witness.phi_f(),
            witness.psi_f(),
            witness.ambient(),
        )?);
    }

    let ctx = standard_context(&witness, options.seed)?;
    for (name, cert) in witness_certificates(&witness, mode) {
        let check = validate_certificate(&cert, &ctx)?;
        checks.push(check.renamed(&format!("certificate/{name}")));
    }

    let errors: Vec<f64> = test_set.iter().map(|x| factorization_error(&witness, x)).collect();
    let (worst_at, max_error) = errors
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |acc, (i, e)| if e > acc.1 { (i, e) } else { acc });
    checks.push(
        CheckResult::residual("max-error", max_error, epsilon)
            .with_detail(format!("largest at test element {worst_at} of {}", errors.len())),
    );
    for c in &mut checks {
        c.name = format!("{prefix}/{}", c.name);
    }
    Ok(NuclearityReport {
        errors,
        max_error,
        checks,
    })
}
