use rand::Rng;
use serde::{Deserialize, Serialize};

use super::field::AmenabilityField;
use crate::check::CheckResult;
use crate::coactions::{delta, delta_window_matrix, GroupAlgebra};
use crate::cpmaps::{verify_cp, CpMode, LinearMapOp};
use crate::crossed::{CrossedElement, CrossedSystem, WindowedMatrix};
use crate::error::{Error, Result};
use crate::groups::{GroupTuple, Window};
use crate::linalg::{kron, norm, ComplexMatrix, ONE};
use crate::random::{seeded, CheckRng};

/// Tolerance of the normalization experiment's two assertions.
pub const NORMALIZATION_TOL: f64 = 1e-10;

/// The factorization `A ⋊_r G → M_F(A) → A ⋊_r G` built from a field `T`:
/// `φ` is the regular representation into `A ⊗ B(ℓ²(W))`, `φ_F` its
/// compression by `1 ⊗ P_F`, `θ` the compression by
/// `X = Σ_{t∈F} α_{bar(t)⁻¹}(T(bar t)) ⊗ e_{t,t}`, and
/// `ψ_F(a ⊗ e_{s,t}) = α_{bar s}(a) bar(s) bar(t)⁻¹`.
#[derive(Debug, Clone)]
pub struct Witness {
    field: AmenabilityField,
    window: Window,
    ambient: Window,
    include_pre_factor: bool,
    phi: LinearMapOp,
    phi_f: LinearMapOp,
    theta: LinearMapOp,
    psi_f: LinearMapOp,
    x: ComplexMatrix,
}

/// Singletons over `G` in group order, then the longer tuples of `window`,
/// closed under left translation.
pub fn ambient_window(sys: &CrossedSystem, window: &Window) -> Result<Window> {
    let g = sys.group();
    let mut tuples: Vec<GroupTuple> = g.elements().map(GroupTuple::singleton).collect();
    tuples.extend(window.tuples().iter().filter(|t| t.len() > 1).cloned());
    Window::new(tuples)?.translation_closure(g)
}

/// `Σ_{p,q} α_{bar p}(m_{p,q}) bar(p) bar(q)⁻¹`, the map `ψ_W` on
/// `A ⊗ B(ℓ²(W))`; every `ψ_F` is its restriction to `M_F(A)`.
pub fn psi_coefficients(sys: &CrossedSystem, m: &WindowedMatrix) -> Result<CrossedElement> {
    let g = sys.group();
    let bars = m.window().bars(g)?;
    let n = bars.len();
    let mut coeffs = vec![ComplexMatrix::zeros(sys.dim(), sys.dim()); g.order()];
    for p in 0..n {
        for q in 0..n {
            let a = m.entry(p, q);
            if a.max_abs() == 0.0 {
                continue;
            }
            let s = g.mul(bars[p], g.inv(bars[q]));
            coeffs[s] += &sys.alpha(bars[p], a);
        }
    }
    sys.element(coeffs)
}

/// The crossed-product basis `b_i s` as elements, index `s * dim(A) + i`.
pub fn coefficient_basis(sys: &CrossedSystem) -> Vec<CrossedElement> {
    sys.group()
        .elements()
        .flat_map(|s| sys.algebra().basis().iter().map(move |b| (s, b.clone())))
        .map(|(s, b)| sys.monomial(b, s))
        .collect()
}

pub fn build_witness(field: &AmenabilityField, window: Option<Window>, include_pre_factor: bool) -> Result<Witness> {
    let sys = field.system();
    let g = sys.group();
    let d = sys.dim();
    let window = match window {
        Some(w) => w,
        None => Window::singletons(field.support().iter().copied())?,
    };
    let bars = window.bars(g)?;
    let mut seen = vec![false; g.order()];
    for (t, &b) in window.tuples().iter().zip(&bars) {
        if std::mem::replace(&mut seen[b], true) {
            return Err(Error::AmbiguousWindow(format!(
                "tuple {:?} repeats the product {}",
                t.components(),
                g.label(b)
            )));
        }
    }
    let mut covered: Vec<usize> = bars.clone();
    covered.sort_unstable();
    if covered != field.support() {
        return Err(Error::InvalidInput(
            "the window's products must be exactly the support of the field".into(),
        ));
    }

    let ambient = ambient_window(sys, &window)?;
    let wn = ambient.len();
    let order = g.order();
    let perms = g
        .elements()
        .map(|r| ambient.translation_permutation(g, r))
        .collect::<Result<Vec<_>>>()?;
    let ambient_bars = ambient.bars(g)?;
    // Regular representation on every tuple of W: the block (r t, t) of φ(a r)
    // is α_{bar(rt)⁻¹}(a).
    let regular = |m: &ComplexMatrix| {
        let mut out = ComplexMatrix::zeros(d * wn, d * wn);
        for r in g.elements() {
            let m_r = ComplexMatrix::from_fn(d, d, |i, j| m[(i * order + r, j * order + g.identity())]);
            let a_r = sys.alpha(r, &m_r);
            for (q, &p) in perms[r].iter().enumerate() {
                let block = sys.alpha(g.inv(ambient_bars[p]), &a_r);
                for i in 0..d {
                    for j in 0..d {
                        out[(i * wn + p, j * wn + q)] = block[(i, j)];
                    }
                }
            }
        }
        out
    };
    let mut projection = ComplexMatrix::zeros(wn, wn);
    let mut x_parts = ComplexMatrix::zeros(d * wn, d * wn);
    for (t, &b) in window.tuples().iter().zip(&bars) {
        let p = ambient.position(t).expect("window lies in its ambient window");
        projection[(p, p)] = ONE;
        x_parts += &kron(&sys.alpha(g.inv(b), field.value(b)), &ComplexMatrix::unit(wn, p, p));
    }
    let p_f = kron(&ComplexMatrix::identity(d), &projection);

    let crossed = sys.crossed_algebra();
    let phi = LinearMapOp::from_fn(crossed.clone(), d * wn, regular)?;
    let phi = phi.clone().with_codomain_unit(phi.unit_image()?);
    let phi_f = LinearMapOp::from_fn(crossed.clone(), d * wn, |m| p_f.conjugate(&phi.apply(m)))?
        .with_codomain_unit(p_f.clone());
    let m_f = sys.window_algebra(&ambient, &window)?;
    let theta = LinearMapOp::from_fn(m_f.clone(), d * wn, |m| x_parts.conjugate(m))?.with_codomain_unit(p_f);
    let psi_images = m_f
        .basis()
        .iter()
        .map(|b| {
            let wm = WindowedMatrix::from_matrix(ambient.clone(), d, b)?;
            Ok(sys.represent(&psi_coefficients(sys, &wm)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let psi_f = LinearMapOp::new(m_f, sys.ambient_dim(), psi_images)?;
    Ok(Witness {
        field: field.clone(),
        window,
        ambient,
        include_pre_factor,
        phi,
        phi_f,
        theta,
        psi_f,
        x: x_parts,
    })
}

impl Witness {
    pub fn field(&self) -> &AmenabilityField {
        &self.field
    }

    pub fn system(&self) -> &CrossedSystem {
        self.field.system()
    }

    /// `F`.
    pub fn window(&self) -> &Window {
        &self.window
    }

    /// `W ⊇ F`, closed under translation; its first `|G|` tuples are the
    /// singletons.
    pub fn ambient(&self) -> &Window {
        &self.ambient
    }

    pub fn include_pre_factor(&self) -> bool {
        self.include_pre_factor
    }

    pub fn phi(&self) -> &LinearMapOp {
        &self.phi
    }

    pub fn phi_f(&self) -> &LinearMapOp {
        &self.phi_f
    }

    pub fn theta(&self) -> &LinearMapOp {
        &self.theta
    }

    pub fn psi_f(&self) -> &LinearMapOp {
        &self.psi_f
    }

    /// The compressing element `X`.
    pub fn x(&self) -> &ComplexMatrix {
        &self.x
    }

    /// `1/|F|` with the pre-factor, else 1.
    pub fn scale(&self) -> f64 {
        if self.include_pre_factor {
            1.0 / self.window.len() as f64
        } else {
            1.0
        }
    }

    /// `ψ = scale · ψ_F ∘ θ`.
    pub fn downward(&self) -> Result<LinearMapOp> {
        Ok(self.psi_f.compose(&self.theta)?.scale(self.scale()))
    }

    /// `ψ ∘ φ_F` on the crossed product.
    pub fn approximant(&self) -> Result<LinearMapOp> {
        self.downward()?.compose(&self.phi_f)
    }

    /// `ψ(φ_F(m))` for a represented element `m`.
    pub fn approximate(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let through = self.theta.apply(&self.phi_f.apply(m));
        self.psi_f.apply(&through).scale_real(self.scale())
    }

    /// `ψ_{rF}` for every `r ∈ G`, indexed by `r`.
    pub fn psi_family(&self) -> Result<Vec<LinearMapOp>> {
        let sys = self.system();
        let d = sys.dim();
        sys.group()
            .elements()
            .map(|r| {
                let moved = self.window.translate(sys.group(), r)?;
                let space = sys.window_algebra(&self.ambient, &moved)?;
                LinearMapOp::from_fn(space, sys.ambient_dim(), |b| {
                    let wm = WindowedMatrix::from_matrix(self.ambient.clone(), d, b).expect("window-sized basis");
                    sys.represent(&psi_coefficients(sys, &wm).expect("entries lie in A"))
                })
            })
            .collect()
    }

    /// Construction checks: `φ` is a `*`-homomorphism, `φ_F` and `θ` are
    /// c.c.p., `ψ_F` is c.p., and `ψ_F ∘ θ` is contractive (unital without the
    /// pre-factor).
    pub fn verify(&self) -> Result<Vec<CheckResult>> {
        let tols = *self.system().tolerances();
        let basis = self.phi.domain().basis();
        let mut hom: f64 = 0.0;
        for (i, a) in basis.iter().enumerate() {
            let pa = &self.phi.images()[i];
            hom = hom.max(self.phi.apply(&a.adjoint()).max_abs_diff(&pa.adjoint()));
            for (j, b) in basis.iter().enumerate() {
                let lhs = self.phi.apply(&a.matmul(b));
                hom = hom.max(lhs.max_abs_diff(&pa.matmul(&self.phi.images()[j])));
            }
        }
        let psi_theta = self.downward()?;
        let unit_image = psi_theta.unit_image()?;
        let mut checks = vec![
            CheckResult::residual("witness/phi-homomorphism", hom, tols.identity_tol),
            verify_cp(&self.phi_f, CpMode::Ccp, &tols)?.renamed("witness/phi-f-ccp"),
            verify_cp(&self.theta, CpMode::Ccp, &tols)?.renamed("witness/theta-ccp"),
            verify_cp(&self.psi_f, CpMode::Cp, &tols)?.renamed("witness/psi-f-cp"),
            CheckResult::residual("witness/contractive", norm(&unit_image) - 1.0, tols.identity_tol),
        ];
        if !self.include_pre_factor {
            let one = ComplexMatrix::identity(self.system().ambient_dim());
            checks.push(CheckResult::residual(
                "witness/unital",
                norm(&(&unit_image - &one)),
                tols.identity_tol,
            ));
        }
        Ok(checks)
    }
}

/// `‖ψ(φ_F(x)) − x‖` in the reduced norm.
pub fn factorization_error(witness: &Witness, x: &CrossedElement) -> f64 {
    let m = witness.system().represent(x);
    norm(&(&witness.approximate(&m) - &m))
}

/// Largest factorization error over the crossed-product basis.
pub fn max_basis_error(witness: &Witness) -> f64 {
    coefficient_basis(witness.system())
        .iter()
        .map(|x| factorization_error(witness, x))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NuclearityMode {
    /// Module `G`-maps and `G`-families.
    Module,
    /// Comodule maps and cofamilies.
    Comodule,
}

impl NuclearityMode {
    pub fn task_name(self) -> &'static str {
        match self {
            Self::Module => "nuclearity-module",
            Self::Comodule => "nuclearity-comodule",
        }
    }
}

/// Random-input tests of the identities the witness maps satisfy. Module
/// mode: `φ(r·x) = r·φ(x)`, `ψ_{rF}(r·m) = r·ψ_F(m)` and both module
/// identities; comodule mode: `(φ_F⊗id)δ = δ_F φ_F` and `(ψ_F⊗id)δ_F = δ ψ_F`.
/// Left and right sides take independent routes (built maps against
/// coefficient formulas).
pub fn witness_identities(
    witness: &Witness,
    mode: NuclearityMode,
    trials: usize,
    seed: u64,
) -> Result<Vec<CheckResult>> {
    let sys = witness.system();
    let g = sys.group();
    let tol = sys.tolerances().identity_tol;
    let ambient = witness.ambient();
    let positions: Vec<usize> = witness
        .window()
        .tuples()
        .iter()
        .map(|t| ambient.position(t).expect("window lies in its ambient window"))
        .collect();
    let mut rng = seeded(seed);
    let random_m_f = |rng: &mut CheckRng| -> WindowedMatrix {
        let p = positions[rng.gen_range(0..positions.len())];
        let q = positions[rng.gen_range(0..positions.len())];
        WindowedMatrix::matrix_unit(ambient.clone(), p, q, sys.random_algebra_element(rng))
    };
    let mut checks = Vec::new();
    match mode {
        NuclearityMode::Module => {
            let family = witness.psi_family()?;
            let (mut phi_g, mut psi_g, mut phi_mod, mut psi_mod) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
            for _ in 0..trials {
                let r = rng.gen_range(0..g.order());
                let x = sys.random_element(&mut rng);
                let b = sys.random_algebra_element(&mut rng);
                let xm = sys.represent(&x);
                let u = sys.window_translation(r, ambient)?;
                let lhs = witness.phi().apply(&sys.represent(&sys.g_act(r, &x)?));
                phi_g = phi_g.max(lhs.max_abs_diff(&u.conjugate(&witness.phi().apply(&xm))));
                let lhs = witness.phi().apply(&sys.represent(&sys.module_act(&x, &b)?));
                let rhs = witness.phi().apply(&xm).matmul(&sys.window_pi(ambient, &b)?);
                phi_mod = phi_mod.max(lhs.max_abs_diff(&rhs));

                let m = random_m_f(&mut rng);
                let moved = sys.g_act_window(r, &m)?;
                let lhs = family[r].apply(&moved.to_matrix());
                let rhs = sys.represent(&sys.g_act(r, &psi_coefficients(sys, &m)?)?);
                psi_g = psi_g.max(lhs.max_abs_diff(&rhs));
                let lhs = witness.psi_f().apply(&sys.module_act_window(&m, &b)?.to_matrix());
                let rhs = sys.represent(&sys.module_act(&psi_coefficients(sys, &m)?, &b)?);
                psi_mod = psi_mod.max(lhs.max_abs_diff(&rhs));
            }
            checks.push(CheckResult::residual("identities/phi-gmap", phi_g, tol));
            checks.push(CheckResult::residual("identities/psi-family", psi_g, tol));
            checks.push(CheckResult::residual("identities/phi-module", phi_mod, tol));
            checks.push(CheckResult::residual("identities/psi-module", psi_mod, tol));
        }
        NuclearityMode::Comodule => {
            let lambdas = GroupAlgebra::new(g)?.lambdas().to_vec();
            let (mut phi_c, mut psi_c) = (0.0f64, 0.0f64);
            for _ in 0..trials {
                let x = sys.random_element(&mut rng);
                let lhs = witness.phi_f().tensor_id_group(&delta(sys, &x), &lambdas);
                let rhs = delta_window_matrix(sys, ambient, &witness.phi_f().apply(&sys.represent(&x)))?;
                phi_c = phi_c.max(lhs.max_abs_diff(&rhs));

                let m = random_m_f(&mut rng).to_matrix();
                let lhs = witness
                    .psi_f()
                    .tensor_id_group(&delta_window_matrix(sys, ambient, &m)?, &lambdas);
                let wm = WindowedMatrix::from_matrix(ambient.clone(), sys.dim(), &m)?;
                let rhs = delta(sys, &psi_coefficients(sys, &wm)?);
                psi_c = psi_c.max(lhs.max_abs_diff(&rhs));
            }
            checks.push(CheckResult::residual("identities/phi-f-comap", phi_c, tol));
            checks.push(CheckResult::residual("identities/psi-f-comap", psi_c, tol));
        }
    }
    Ok(checks)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationRecord {
    /// Largest basis error of `ψ_F ∘ θ ∘ φ_F`.
    pub err_without: f64,
    /// Error on the unit of `(1/|F|) ψ_F ∘ θ ∘ φ_F`.
    pub err_with: f64,
    /// `1 − 1/|F|`.
    pub expected_with: f64,
    pub note: String,
}

impl NormalizationRecord {
    pub fn checks(&self) -> Vec<CheckResult> {
        vec![
            CheckResult::residual("normalization/err-without", self.err_without, NORMALIZATION_TOL),
            CheckResult::residual(
                "normalization/err-with",
                (self.err_with - self.expected_with).abs(),
                NORMALIZATION_TOL,
            )
            .with_detail(format!(
                "err_with = {:.12}, expected 1 - 1/|F| = {:.12}",
                self.err_with, self.expected_with
            )),
        ]
    }
}

/// Compares the witness with and without the `1/|F|` pre-factor.
pub fn normalization_experiment(field: &AmenabilityField) -> Result<NormalizationRecord> {
    let without = build_witness(field, None, false)?;
    let with = build_witness(field, None, true)?;
    let sys = field.system();
    let f = with.window().len() as f64;
    let err_with = factorization_error(&with, &sys.one());
    Ok(NormalizationRecord {
        err_without: max_basis_error(&without),
        err_with,
        expected_with: 1.0 - 1.0 / f,
        note: format!(
            "with the 1/|F| pre-factor, psi(theta(1)) = 1/|F| = {:.6}, so the unit is missed by 1 - 1/|F|; \
             without it psi_F o theta is unital and the factorization is exact for invariant fields",
            1.0 / f
        ),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: usize,
    pub max_defect: f64,
    /// Largest error over the crossed-product basis.
    pub max_error: f64,
    /// Error on `1·s`, per group element.
    pub errors: Vec<f64>,
}

/// Uniform fields on the first `k` group elements, `k = 1, …, |G|`.
pub fn defect_sweep(sys: &CrossedSystem) -> Result<Vec<SweepRow>> {
    let g = sys.group();
    let unit = sys
        .algebra()
        .unit()
        .cloned()
        .ok_or_else(|| Error::NotUnital("fields need a unital algebra".into()))?;
    (1..=g.order())
        .map(|k| {
            let c = (k as f64).powf(-0.5);
            let values = g
                .elements()
                .map(|s| {
                    if s < k {
                        unit.scale_real(c)
                    } else {
                        ComplexMatrix::zeros(sys.dim(), sys.dim())
                    }
                })
                .collect();
            let field = AmenabilityField::new(sys, values)?;
            let witness = build_witness(&field, None, false)?;
            let errors = g
                .elements()
                .map(|s| factorization_error(&witness, &sys.monomial(unit.clone(), s)))
                .collect();
            Ok(SweepRow {
                k,
                max_defect: field.max_defect(),
                max_error: max_basis_error(&witness),
                errors,
            })
        })
        .collect()
}
