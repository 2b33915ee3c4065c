//! Linear maps between concrete algebras, complete positivity through the
//! generalized Choi matrix, cb-norm bounds, compressions, and equivariance of
//! maps between operator modules.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebras::StarAlgebra;
use crate::check::CheckResult;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, min_hermitian_eigenvalue, norm, ComplexMatrix, ToleranceConfig, C64, ZERO};
use crate::random::{random_combination, seeded};

pub mod certificate;

pub use certificate::{validate_certificate, Certificate, CertificateContext, FamilyBinding, Side};

/// A linear map `θ: B → M_K` stored by its values on the basis of `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMapOp {
    domain: StarAlgebra,
    codomain_dim: usize,
    images: Vec<ComplexMatrix>,
    codomain_unit: Option<ComplexMatrix>,
    certificate: Option<Certificate>,
}

impl LinearMapOp {
    pub fn new(domain: StarAlgebra, codomain_dim: usize, images: Vec<ComplexMatrix>) -> Result<Self> {
        if images.len() != domain.dim() {
            return Err(Error::InvalidInput(format!(
                "map needs {} basis images, got {}",
                domain.dim(),
                images.len()
            )));
        }
        if images.iter().any(|m| m.shape() != (codomain_dim, codomain_dim)) {
            return Err(Error::InvalidInput(format!(
                "images must be {codomain_dim}x{codomain_dim}"
            )));
        }
        Ok(Self {
            domain,
            codomain_dim,
            images,
            codomain_unit: None,
            certificate: None,
        })
    }

    pub fn from_fn(
        domain: StarAlgebra,
        codomain_dim: usize,
        f: impl Fn(&ComplexMatrix) -> ComplexMatrix,
    ) -> Result<Self> {
        let images = domain.basis().iter().map(&f).collect();
        Self::new(domain, codomain_dim, images)
    }

    pub fn identity(domain: &StarAlgebra) -> Self {
        Self {
            codomain_dim: domain.ambient_dim(),
            images: domain.basis().to_vec(),
            codomain_unit: domain.unit().cloned(),
            domain: domain.clone(),
            certificate: None,
        }
    }

    pub fn zero(domain: &StarAlgebra, codomain_dim: usize) -> Self {
        Self {
            images: vec![ComplexMatrix::zeros(codomain_dim, codomain_dim); domain.dim()],
            codomain_dim,
            domain: domain.clone(),
            codomain_unit: None,
            certificate: None,
        }
    }

    /// `x ↦ xᵀ`. The domain must be closed under transposition.
    pub fn transpose(domain: &StarAlgebra) -> Result<Self> {
        let tol = 1e-9;
        for b in domain.basis() {
            if !domain.contains(&b.transpose(), tol) {
                return Err(Error::InvalidInput("domain is not closed under transposition".into()));
            }
        }
        let mut map = Self::from_fn(domain.clone(), domain.ambient_dim(), ComplexMatrix::transpose)?;
        map.codomain_unit = domain.unit().cloned();
        Ok(map)
    }

    /// Sets the unit of the codomain used by the `ucp` test; defaults to the
    /// identity of `M_K`.
    pub fn with_codomain_unit(mut self, unit: ComplexMatrix) -> Self {
        self.codomain_unit = Some(unit);
        self
    }

    pub fn with_certificate(mut self, certificate: Certificate) -> Self {
        self.certificate = Some(certificate);
        self
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        self.certificate.as_ref()
    }

    pub fn domain(&self) -> &StarAlgebra {
        &self.domain
    }

    pub fn codomain_dim(&self) -> usize {
        self.codomain_dim
    }

    pub fn images(&self) -> &[ComplexMatrix] {
        &self.images
    }

    pub fn codomain_unit(&self) -> ComplexMatrix {
        self.codomain_unit
            .clone()
            .unwrap_or_else(|| ComplexMatrix::identity(self.codomain_dim))
    }

    pub fn apply_coords(&self, coeffs: &[C64]) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.codomain_dim, self.codomain_dim);
        for (c, m) in coeffs.iter().zip(&self.images) {
            if *c != ZERO {
                out += &m.scale(*c);
            }
        }
        out
    }

    /// `θ(x)` for `x` in the domain (other matrices are first projected onto it).
    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.apply_coords(&self.domain.coords(x))
    }

    pub fn unit_image(&self) -> Result<ComplexMatrix> {
        let unit = self
            .domain
            .unit()
            .ok_or_else(|| Error::NotUnital("domain has no unit".into()))?;
        Ok(self.apply(unit))
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            images: self.images.iter().map(|m| m.scale_real(factor)).collect(),
            certificate: None,
            ..self.clone()
        }
    }

    /// `θ + σ`; both maps must share the domain.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.domain != other.domain || self.codomain_dim != other.codomain_dim {
            return Err(Error::InvalidInput("sums need a common domain and codomain".into()));
        }
        Ok(Self {
            images: self.images.iter().zip(&other.images).map(|(a, b)| a + b).collect(),
            certificate: None,
            ..self.clone()
        })
    }

    /// `self ∘ inner`. Fails unless `inner` lands in the domain of `self`.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if inner.codomain_dim != self.domain.ambient_dim() {
            return Err(Error::InvalidInput("composition dimensions do not match".into()));
        }
        let residual = inner.range_residual(&self.domain);
        if residual > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "inner map leaves the outer domain (residual {residual:.3e})"
            )));
        }
        Ok(Self {
            domain: inner.domain.clone(),
            codomain_dim: self.codomain_dim,
            images: inner.images.iter().map(|m| self.apply(m)).collect(),
            codomain_unit: self.codomain_unit.clone(),
            certificate: None,
        })
    }

    /// How far the range of the map is from the given algebra.
    pub fn range_residual(&self, target: &StarAlgebra) -> f64 {
        self.images
            .iter()
            .map(|m| {
                if m.shape() != (target.ambient_dim(), target.ambient_dim()) {
                    f64::INFINITY
                } else {
                    target.membership_residual(m)
                }
            })
            .fold(0.0, f64::max)
    }

    /// `max_i |θ(b_i*) − θ(b_i)*|`; zero exactly when θ is *-compatible.
    pub fn star_residual(&self) -> f64 {
        self.domain
            .basis()
            .iter()
            .zip(&self.images)
            .map(|(b, img)| self.apply(&b.adjoint()).max_abs_diff(&img.adjoint()))
            .fold(0.0, f64::max)
    }

    /// `(θ ⊗ id_k)(X)` for `X ∈ B ⊗ M_k` (algebra index major).
    pub fn amplify(&self, x: &ComplexMatrix, k: usize) -> ComplexMatrix {
        let d = self.domain.ambient_dim();
        let big_k = self.codomain_dim;
        let mut out = ComplexMatrix::zeros(big_k * k, big_k * k);
        for p in 0..k {
            for q in 0..k {
                let block = ComplexMatrix::from_fn(d, d, |i, j| x[(i * k + p, j * k + q)]);
                let image = self.apply(&block);
                for r in 0..big_k {
                    for c in 0..big_k {
                        out[(r * k + p, c * k + q)] = image[(r, c)];
                    }
                }
            }
        }
        out
    }

    /// `(θ ⊗ id)(Σ_g z_g ⊗ λ_g) = Σ_g θ(z_g) ⊗ λ_g`, where the `z_g` are read
    /// off by the normalized partial trace against `λ_g`.
    pub fn tensor_id_group(&self, z: &ComplexMatrix, lambdas: &[ComplexMatrix]) -> ComplexMatrix {
        let parts = group_components(z, lambdas);
        let mut out = ComplexMatrix::zeros(self.codomain_dim * lambdas.len(), self.codomain_dim * lambdas.len());
        for (zg, lg) in parts.iter().zip(lambdas) {
            out += &self.apply(zg).kron(lg);
        }
        out
    }
}

/// Components `z_g` of `Z = Σ_g z_g ⊗ λ_g` with the group leg last.
pub fn group_components(z: &ComplexMatrix, lambdas: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
    let n = lambdas.len();
    let k = z.rows() / n;
    lambdas
        .iter()
        .map(|lg| {
            ComplexMatrix::from_fn(k, k, |i, j| {
                let mut acc = ZERO;
                for u in 0..n {
                    for v in 0..n {
                        let l = lg[(u, v)];
                        if l != ZERO {
                            acc += z[(i * n + u, j * n + v)] * l.conj();
                        }
                    }
                }
                acc / n as f64
            })
        })
        .collect()
}

/// `[θ(b_i* b_j)]_{i,j}`, blocks ordered by domain-basis index.
pub fn generalized_choi(theta: &LinearMapOp) -> ComplexMatrix {
    let basis = theta.domain.basis();
    let m = basis.len();
    let k = theta.codomain_dim;
    let mut out = ComplexMatrix::zeros(m * k, m * k);
    for (i, bi) in basis.iter().enumerate() {
        let bi_star = bi.adjoint();
        for (j, bj) in basis.iter().enumerate() {
            let block = theta.apply(&bi_star.matmul(bj));
            out.set_block(i * k, j * k, &block);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CpMode {
    Cp,
    Ucp,
    Ccp,
}

/// Minimum eigenvalue of the generalized Choi matrix; a non-Hermitian Choi
/// matrix reports the more negative of its Hermitian-part minimum and minus
/// its asymmetry.
pub fn choi_min_eigenvalue(theta: &LinearMapOp, tols: &ToleranceConfig) -> f64 {
    let choi = generalized_choi(theta);
    match min_hermitian_eigenvalue(&choi, tols.identity_tol) {
        Ok(v) => v,
        Err(_) => {
            let h = min_hermitian_eigenvalue(&choi.hermitian_part(), 1.0).unwrap_or(f64::NAN);
            h.min(-choi.hermitian_defect())
        }
    }
}

pub fn verify_cp(theta: &LinearMapOp, mode: CpMode, tols: &ToleranceConfig) -> Result<CheckResult> {
    let cp = CheckResult::lower_bound("cp/choi-min-eig", choi_min_eigenvalue(theta, tols), tols.psd_tol);
    match mode {
        CpMode::Cp => Ok(cp),
        CpMode::Ucp => {
            let image = theta.unit_image()?;
            let defect = image.max_abs_diff(&theta.codomain_unit());
            let unital = CheckResult::residual("ucp/unit", defect, tols.identity_tol);
            Ok(CheckResult::all_of("ucp", &[cp, unital]))
        }
        CpMode::Ccp => {
            let image = theta.unit_image()?;
            let excess = norm(&image) - 1.0;
            let contractive = CheckResult::residual("ccp/norm", excess, tols.identity_tol);
            Ok(CheckResult::all_of("ccp", &[cp, contractive]))
        }
    }
}

/// `x ↦ X x X*` on `domain`.
pub fn compress_by(domain: &StarAlgebra, x: &ComplexMatrix) -> Result<LinearMapOp> {
    if !x.is_square() || x.rows() != domain.ambient_dim() {
        return Err(Error::InvalidInput(format!(
            "compression needs a {0}x{0} matrix, got {1}x{2}",
            domain.ambient_dim(),
            x.rows(),
            x.cols()
        )));
    }
    LinearMapOp::from_fn(domain.clone(), x.rows(), |b| x.conjugate(b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CbNormOptions {
    pub restarts: usize,
    pub iterations: usize,
    /// Largest tensor level `k`; `None` means `min(K, 4)` for codomain `M_K`.
    pub max_level: Option<usize>,
    pub seed: u64,
}

impl Default for CbNormOptions {
    fn default() -> Self {
        Self {
            restarts: 64,
            iterations: 30,
            max_level: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CbNorm {
    /// Certified lower bound: the best ratio `|(θ⊗id_k)(X)| / |X|` found.
    pub lower: f64,
    /// `|θ(1)|`, exact when θ is completely positive.
    pub exact_if_cp: Option<f64>,
}

impl CbNorm {
    /// The exact value when available, else the lower bound.
    pub fn value(&self) -> f64 {
        self.exact_if_cp.unwrap_or(self.lower)
    }
}

pub fn cb_norm(theta: &LinearMapOp, options: &CbNormOptions, tols: &ToleranceConfig) -> CbNorm {
    let exact_if_cp = match (verify_cp(theta, CpMode::Cp, tols), theta.unit_image()) {
        (Ok(cp), Ok(image)) if cp.pass => Some(norm(&image)),
        _ => None,
    };
    let max_level = options.max_level.unwrap_or_else(|| theta.codomain_dim.min(4)).max(1);
    let mut rng = seeded(options.seed);
    let mut lower: f64 = 0.0;
    for restart in 0..options.restarts {
        let k = 1 + restart % max_level;
        lower = lower.max(ascend(theta, k, options.iterations, &mut rng));
    }
    CbNorm { lower, exact_if_cp }
}

/// Alternating maximization of `|(θ⊗id_k)(X)|` over `|X| ≤ 1` in `B ⊗ M_k`:
/// take the top singular pair `(u, v)` of the output, move `X` to the polar
/// part of the gradient of `Re u*(θ⊗id_k)(X)v`, and project back onto
/// `B ⊗ M_k`.
fn ascend(theta: &LinearMapOp, k: usize, iterations: usize, rng: &mut impl Rng) -> f64 {
    let dom = &theta.domain;
    let d = dom.ambient_dim();
    let big_k = theta.codomain_dim;
    let mut x = ComplexMatrix::zeros(d * k, d * k);
    for p in 0..k {
        for q in 0..k {
            let block = random_combination(rng, dom.basis());
            embed_block(&mut x, &block, p, q, k);
        }
    }
    let mut best: f64 = 0.0;
    for _ in 0..iterations {
        let xn = norm(&x);
        if xn <= f64::MIN_POSITIVE {
            break;
        }
        x = x.scale_real(1.0 / xn);
        let y = theta.amplify(&x, k);
        let (sigma, u, v) = crate::linalg::top_singular(&y);
        best = best.max(sigma);
        // g_{i,p,q} = u*(θ(b_i) ⊗ e_pq)v; the gradient has coordinates Gram⁻¹ conj(g).
        let mut grad = ComplexMatrix::zeros(d * k, d * k);
        for p in 0..k {
            for q in 0..k {
                let g: Vec<C64> = theta
                    .images
                    .iter()
                    .map(|img| {
                        let mut acc = ZERO;
                        for r in 0..big_k {
                            let ur = u[r * k + p].conj();
                            if ur == ZERO {
                                continue;
                            }
                            for c in 0..big_k {
                                acc += ur * img[(r, c)] * v[c * k + q];
                            }
                        }
                        acc.conj()
                    })
                    .collect();
                let block = dom.combine(&dom.from_inner_products(&g));
                embed_block(&mut grad, &block, p, q, k);
            }
        }
        let Some(polar) = polar_part(&grad) else { break };
        let mut projected = ComplexMatrix::zeros(d * k, d * k);
        for p in 0..k {
            for q in 0..k {
                let block = ComplexMatrix::from_fn(d, d, |i, j| polar[(i * k + p, j * k + q)]);
                embed_block(&mut projected, &dom.combine(&dom.coords(&block)), p, q, k);
            }
        }
        x = projected;
    }
    let xn = norm(&x);
    if xn > f64::MIN_POSITIVE {
        best = best.max(norm(&theta.amplify(&x, k)) / xn);
    }
    best
}

fn embed_block(target: &mut ComplexMatrix, block: &ComplexMatrix, p: usize, q: usize, k: usize) {
    for i in 0..block.rows() {
        for j in 0..block.cols() {
            target[(i * k + p, j * k + q)] = block[(i, j)];
        }
    }
}

/// Partial isometry `U` with `G = U|G|`.
fn polar_part(g: &ComplexMatrix) -> Option<ComplexMatrix> {
    let gram = g.adjoint().matmul(g);
    let eig = hermitian_eigen(&gram, 1e-6).ok()?;
    let top = eig.values.last().copied()?.max(0.0);
    if top <= f64::MIN_POSITIVE {
        return None;
    }
    let n = gram.rows();
    let mut inv_sqrt = ComplexMatrix::zeros(n, n);
    for (k, &mu) in eig.values.iter().enumerate() {
        if mu > 1e-12 * top {
            inv_sqrt[(k, k)] = C64::new(1.0 / mu.sqrt(), 0.0);
        }
    }
    let v = &eig.vectors;
    Some(g.matmul(&v.matmul(&inv_sqrt).matmul(&v.adjoint())))
}

/// A coaction `δ: M → M ⊗ C*_r(G)` realized concretely, group leg last.
#[derive(Clone)]
pub struct Coaction {
    lambdas: Vec<ComplexMatrix>,
    map: Arc<dyn Fn(&ComplexMatrix) -> ComplexMatrix + Send + Sync>,
}

impl Coaction {
    pub fn new(
        lambdas: Vec<ComplexMatrix>,
        map: impl Fn(&ComplexMatrix) -> ComplexMatrix + Send + Sync + 'static,
    ) -> Self {
        Self {
            lambdas,
            map: Arc::new(map),
        }
    }

    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        (self.map)(x)
    }

    /// The `λ_g` of the group algebra (size `|G|`).
    pub fn lambdas(&self) -> &[ComplexMatrix] {
        &self.lambdas
    }
}

impl fmt::Debug for Coaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Coaction(|G| = {})", self.lambdas.len())
    }
}

/// A concrete space together with whichever structures are registered on
/// it: a right `A`-action `x·a_k = x R_k` (one operator per basis element of
/// `A`), a `G`-action by unitary conjugation, and a coaction.
#[derive(Debug, Clone)]
pub struct OperatorModule {
    name: String,
    space: StarAlgebra,
    right_action: Option<Vec<ComplexMatrix>>,
    g_action: Option<Vec<ComplexMatrix>>,
    coaction: Option<Coaction>,
}

impl OperatorModule {
    pub fn new(name: impl Into<String>, space: StarAlgebra) -> Self {
        Self {
            name: name.into(),
            space,
            right_action: None,
            g_action: None,
            coaction: None,
        }
    }

    pub fn with_right_action(mut self, operators: Vec<ComplexMatrix>) -> Self {
        self.right_action = Some(operators);
        self
    }

    pub fn with_g_action(mut self, unitaries: Vec<ComplexMatrix>) -> Self {
        self.g_action = Some(unitaries);
        self
    }

    pub fn with_coaction(mut self, coaction: Coaction) -> Self {
        self.coaction = Some(coaction);
        self
    }

    /// The same structures on a subspace (for maps defined on `M_F(A)`).
    pub fn restricted_to(&self, space: StarAlgebra) -> Self {
        Self { space, ..self.clone() }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &StarAlgebra {
        &self.space
    }

    pub fn right_action(&self) -> Option<&[ComplexMatrix]> {
        self.right_action.as_deref()
    }

    pub fn g_action(&self) -> Option<&[ComplexMatrix]> {
        self.g_action.as_deref()
    }

    pub fn coaction(&self) -> Option<&Coaction> {
        self.coaction.as_ref()
    }

    pub fn act(&self, r: usize, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let us = self
            .g_action
            .as_ref()
            .ok_or_else(|| Error::StructureMissing(format!("{}: no group action", self.name)))?;
        Ok(us[r].conjugate(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquivarianceMode {
    /// `θ(x·a) = θ(x)·a`.
    Module,
    /// `θ(α_r(x)) = α_r(θ(x))`.
    Gmap,
    /// `δ_D(θ(x)) = (θ⊗id)δ_B(x)`.
    Gcomap,
}

impl EquivarianceMode {
    pub fn label(self) -> &'static str {
        match self {
            Self::Module => "module",
            Self::Gmap => "gmap",
            Self::Gcomap => "gcomap",
        }
    }
}

/// Tests one equivariance identity on the basis of the domain of `θ`. The
/// result carries the largest residual and, on failure, the worst pair.
pub fn check_equivariance(
    theta: &LinearMapOp,
    domain: &OperatorModule,
    codomain: &OperatorModule,
    mode: EquivarianceMode,
    tols: &ToleranceConfig,
) -> Result<CheckResult> {
    let basis = theta.domain.basis();
    let mut worst = 0.0;
    let mut at = String::new();
    let mut record = |value: f64, what: String| {
        if value > worst {
            worst = value;
            at = what;
        }
    };
    match mode {
        EquivarianceMode::Module => {
            let (Some(rd), Some(rc)) = (domain.right_action(), codomain.right_action()) else {
                return Err(Error::StructureMissing("module actions not registered".into()));
            };
            if rd.len() != rc.len() {
                return Err(Error::StructureMissing("module actions over different algebras".into()));
            }
            for (i, b) in basis.iter().enumerate() {
                let image = &theta.images[i];
                for (k, (ad, ac)) in rd.iter().zip(rc).enumerate() {
                    let moved = b.matmul(ad);
                    let leak = theta.domain.membership_residual(&moved);
                    let diff = theta.apply(&moved).max_abs_diff(&image.matmul(ac));
                    record(diff.max(leak), format!("basis {i}, module basis {k}"));
                }
            }
        }
        EquivarianceMode::Gmap => {
            let (Some(ud), Some(uc)) = (domain.g_action(), codomain.g_action()) else {
                return Err(Error::StructureMissing("group actions not registered".into()));
            };
            for (i, b) in basis.iter().enumerate() {
                for (r, (vd, vc)) in ud.iter().zip(uc).enumerate() {
                    let moved = vd.conjugate(b);
                    let leak = theta.domain.membership_residual(&moved);
                    let diff = theta.apply(&moved).max_abs_diff(&vc.conjugate(&theta.images[i]));
                    record(diff.max(leak), format!("basis {i}, group element {r}"));
                }
            }
        }
        EquivarianceMode::Gcomap => {
            let (Some(cd), Some(cc)) = (domain.coaction(), codomain.coaction()) else {
                return Err(Error::StructureMissing("coactions not registered".into()));
            };
            for (i, b) in basis.iter().enumerate() {
                let lhs = cc.apply(&theta.images[i]);
                let rhs = theta.tensor_id_group(&cd.apply(b), cd.lambdas());
                record(lhs.max_abs_diff(&rhs), format!("basis {i}"));
            }
        }
    }
    let mut result = CheckResult::residual(format!("equivariance/{}", mode.label()), worst, tols.identity_tol);
    if !result.pass {
        result = result.with_detail(format!("worst at {at}"));
    }
    Ok(result)
}
