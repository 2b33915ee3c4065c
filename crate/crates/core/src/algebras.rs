//! Concrete finite-dimensional C*-algebras `A ⊆ M_d`, their centers, states,
//! and group actions by unitary conjugation.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::check::CheckResult;
use crate::error::{Error, Result};
use crate::groups::FiniteGroup;
use crate::linalg::{hermitian_eigen, min_hermitian_eigenvalue, norm, ComplexMatrix, ToleranceConfig, C64, ONE, ZERO};

const SPAN_ITERATIONS: usize = 12;

/// A matrix in JSON: rows of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JsonMatrix(pub Vec<Vec<[f64; 2]>>);

impl JsonMatrix {
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        ComplexMatrix::from_rows(
            self.0
                .iter()
                .map(|row| row.iter().map(|[re, im]| C64::new(*re, *im)).collect())
                .collect(),
        )
    }

    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        Self(
            (0..m.rows())
                .map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlgebraDescriptor {
    FullMatrix { dim: usize },
    Diagonal { dim: usize },
    Span { dim: usize, generators: Vec<JsonMatrix> },
}

/// A *-closed subalgebra of `M_d` given by a linearly independent basis.
///
/// `unit` is the algebra's own unit. For algebras built with
/// [`build_algebra`] it is the ambient identity; corners such as `M_F(A)`
/// inside a larger window carry a projection instead.
#[derive(Debug, Clone, PartialEq)]
pub struct StarAlgebra {
    ambient: usize,
    basis: Vec<ComplexMatrix>,
    gram_inv: ComplexMatrix,
    unit: Option<ComplexMatrix>,
}

impl StarAlgebra {
    /// Wraps a basis without testing closure. Linear independence and the unit
    /// are still checked.
    pub fn from_basis_unchecked(
        ambient: usize,
        basis: Vec<ComplexMatrix>,
        unit: Option<ComplexMatrix>,
    ) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::InvalidInput("algebra basis is empty".into()));
        }
        if basis.iter().any(|b| b.shape() != (ambient, ambient)) {
            return Err(Error::InvalidInput(format!(
                "basis elements must be {ambient}x{ambient}"
            )));
        }
        let m = basis.len();
        let gram = ComplexMatrix::from_fn(m, m, |i, j| basis[i].hs_inner(&basis[j]));
        let gram_inv = gram
            .inverse()
            .map_err(|_| Error::InvalidInput("basis is linearly dependent".into()))?;
        let alg = Self {
            ambient,
            basis,
            gram_inv,
            unit: None,
        };
        if let Some(u) = &unit {
            let tol = 1e-9;
            if !alg.contains(u, tol) {
                return Err(Error::NotUnital("given unit is not in the span".into()));
            }
            for b in &alg.basis {
                let scale = 1.0 + b.max_abs();
                if u.matmul(b).max_abs_diff(b) > tol * scale || b.matmul(u).max_abs_diff(b) > tol * scale {
                    return Err(Error::NotUnital("given element is not a unit".into()));
                }
            }
        }
        Ok(Self { unit, ..alg })
    }

    /// Wraps a basis and verifies *-closure and multiplicative closure.
    pub fn from_basis(
        ambient: usize,
        basis: Vec<ComplexMatrix>,
        unit: Option<ComplexMatrix>,
        tol: f64,
    ) -> Result<Self> {
        let alg = Self::from_basis_unchecked(ambient, basis, unit)?;
        alg.closure_residual().and_then(|r| {
            if r <= tol {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!(
                    "span is not a *-algebra (closure residual {r:.3e})"
                )))
            }
        })?;
        Ok(alg)
    }

    /// Largest distance of `b_i*` and `b_i b_j` from the span.
    pub fn closure_residual(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (i, bi) in self.basis.iter().enumerate() {
            worst = worst.max(self.membership_residual(&bi.adjoint()));
            for bj in &self.basis[i..] {
                worst = worst.max(self.membership_residual(&bi.matmul(bj)));
                worst = worst.max(self.membership_residual(&bj.matmul(bi)));
            }
        }
        Ok(worst)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    pub fn unit(&self) -> Option<&ComplexMatrix> {
        self.unit.as_ref()
    }

    pub fn contains_unit(&self) -> bool {
        self.unit.is_some()
    }

    /// Coordinates of the orthogonal projection of `x` onto the span.
    pub fn coords(&self, x: &ComplexMatrix) -> Vec<C64> {
        let rhs: Vec<C64> = self.basis.iter().map(|b| b.hs_inner(x)).collect();
        self.gram_inv.mul_vec(&rhs)
    }

    /// Coordinates `c` of the element `y` of the span with `⟨b_i, y⟩ = inner[i]`.
    pub fn from_inner_products(&self, inner: &[C64]) -> Vec<C64> {
        self.gram_inv.mul_vec(inner)
    }

    /// Coordinates of `x`, failing when `x` is not in the span.
    pub fn coords_checked(&self, x: &ComplexMatrix, tol: f64) -> Result<Vec<C64>> {
        let c = self.coords(x);
        let back = self.combine(&c);
        let residual = back.max_abs_diff(x);
        if residual > tol * (1.0 + x.max_abs()) {
            return Err(Error::InvalidInput(format!(
                "element is not in the algebra (residual {residual:.3e})"
            )));
        }
        Ok(c)
    }

    pub fn membership_residual(&self, x: &ComplexMatrix) -> f64 {
        self.combine(&self.coords(x)).max_abs_diff(x) / (1.0 + x.max_abs())
    }

    pub fn contains(&self, x: &ComplexMatrix, tol: f64) -> bool {
        x.shape() == (self.ambient, self.ambient) && self.membership_residual(x) <= tol
    }

    pub fn combine(&self, coeffs: &[C64]) -> ComplexMatrix {
        assert_eq!(coeffs.len(), self.dim(), "coefficient count");
        let mut out = ComplexMatrix::zeros(self.ambient, self.ambient);
        for (c, b) in coeffs.iter().zip(&self.basis) {
            if *c != ZERO {
                out += &b.scale(*c);
            }
        }
        out
    }

    pub fn element(&self, coeffs: Vec<C64>) -> Result<AlgebraElement> {
        if coeffs.len() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "expected {} coefficients, got {}",
                self.dim(),
                coeffs.len()
            )));
        }
        let matrix = self.combine(&coeffs);
        Ok(AlgebraElement { coeffs, matrix })
    }

    pub fn element_from_matrix(&self, m: &ComplexMatrix, tol: f64) -> Result<AlgebraElement> {
        let coeffs = self.coords_checked(m, tol)?;
        Ok(AlgebraElement {
            coeffs,
            matrix: m.clone(),
        })
    }
}

/// An element of a [`StarAlgebra`]: coefficients over the basis together with
/// the concrete matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    coeffs: Vec<C64>,
    matrix: ComplexMatrix,
}

impl AlgebraElement {
    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
}

pub fn build_algebra(descriptor: &AlgebraDescriptor) -> Result<StarAlgebra> {
    match descriptor {
        AlgebraDescriptor::FullMatrix { dim } => full_matrix(*dim),
        AlgebraDescriptor::Diagonal { dim } => diagonal(*dim),
        AlgebraDescriptor::Span { dim, generators } => {
            let gens = generators
                .iter()
                .map(JsonMatrix::to_matrix)
                .collect::<Result<Vec<_>>>()?;
            span_closure(*dim, &gens)
        }
    }
}

/// `M_d` with the matrix units `e_{ij}` in row-major order.
pub fn full_matrix(dim: usize) -> Result<StarAlgebra> {
    check_dim(dim)?;
    let basis = (0..dim * dim)
        .map(|k| ComplexMatrix::unit(dim, k / dim, k % dim))
        .collect();
    StarAlgebra::from_basis_unchecked(dim, basis, Some(ComplexMatrix::identity(dim)))
}

/// Diagonal matrices `C^d`, basis `e_{11}, …, e_{dd}`.
pub fn diagonal(dim: usize) -> Result<StarAlgebra> {
    check_dim(dim)?;
    let basis = (0..dim).map(|k| ComplexMatrix::unit(dim, k, k)).collect();
    StarAlgebra::from_basis_unchecked(dim, basis, Some(ComplexMatrix::identity(dim)))
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidInput("algebra dimension must be positive".into()));
    }
    Ok(())
}

/// The *-algebra generated by `generators`, as an orthonormal basis of
/// Hermitian matrices. Fails with `NotUnital` if the identity is not reached.
pub fn span_closure(dim: usize, generators: &[ComplexMatrix]) -> Result<StarAlgebra> {
    check_dim(dim)?;
    if generators.iter().any(|g| g.shape() != (dim, dim)) {
        return Err(Error::InvalidInput(format!("generators must be {dim}x{dim}")));
    }
    let mut basis: Vec<ComplexMatrix> = Vec::new();
    for g in generators {
        push_hermitian_parts(&mut basis, g);
    }
    if basis.is_empty() {
        return Err(Error::InvalidInput("generators span the zero space".into()));
    }
    let mut stable = false;
    for _ in 0..SPAN_ITERATIONS {
        let before = basis.len();
        let snapshot = basis.clone();
        for x in &snapshot {
            for y in &snapshot {
                push_hermitian_parts(&mut basis, &x.matmul(y));
            }
        }
        if basis.len() > dim * dim {
            return Err(Error::InternalError(format!(
                "span completion exceeded dimension {}",
                dim * dim
            )));
        }
        if basis.len() == before {
            stable = true;
            break;
        }
    }
    if !stable {
        return Err(Error::InternalError("span completion did not stabilize".into()));
    }
    let identity = ComplexMatrix::identity(dim);
    let alg = StarAlgebra::from_basis_unchecked(dim, basis, None)?;
    if !alg.contains(&identity, 1e-9) {
        return Err(Error::NotUnital(
            "the generated algebra does not contain the identity".into(),
        ));
    }
    Ok(StarAlgebra {
        unit: Some(identity),
        ..alg
    })
}

/// Adds the Hermitian and skew parts of `x` to an orthonormal Hermitian list
/// when they are independent of it. Inner products between Hermitian matrices
/// are real, so Gram-Schmidt keeps every element Hermitian.
fn push_hermitian_parts(basis: &mut Vec<ComplexMatrix>, x: &ComplexMatrix) {
    let re = x.hermitian_part();
    let im = (x - &x.adjoint()).scale(C64::new(0.0, -0.5));
    let scale = 1.0 + x.frobenius_norm();
    for mut h in [re, im] {
        for _ in 0..2 {
            for b in basis.iter() {
                let proj = b.hs_inner(&h).re;
                h -= &b.scale_real(proj);
            }
        }
        let len = h.frobenius_norm();
        if len > 1e-9 * scale {
            basis.push(h.hermitian_part().scale_real(1.0 / len));
        }
    }
}

/// Orthonormal Hermitian basis of the span of `elements` (assumed *-closed).
pub(crate) fn hermitian_orthonormal(elements: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
    let mut basis = Vec::new();
    for x in elements {
        push_hermitian_parts(&mut basis, x);
    }
    basis
}

/// The center `{x ∈ A : x b = b x for all b ∈ A}`.
pub fn center(algebra: &StarAlgebra) -> Result<StarAlgebra> {
    let m = algebra.dim();
    let d = algebra.ambient_dim();
    let basis = algebra.basis();
    // Column k holds the commutators [b_k, b_i] for all i, flattened.
    let rows = m * d * d;
    let mut system = ComplexMatrix::zeros(rows, m);
    for (k, bk) in basis.iter().enumerate() {
        for (i, bi) in basis.iter().enumerate() {
            let comm = &bk.matmul(bi) - &bi.matmul(bk);
            for (e, z) in comm.as_slice().iter().enumerate() {
                system[(i * d * d + e, k)] = *z;
            }
        }
    }
    let normal = system.adjoint().matmul(&system);
    let eig = hermitian_eigen(&normal, 1e-9)?;
    let top = eig.values.last().copied().unwrap_or(0.0).max(1.0);
    let mut central = Vec::new();
    for (k, &lambda) in eig.values.iter().enumerate() {
        if lambda <= 1e-10 * top {
            central.push(algebra.combine(&eig.vectors.column(k)));
        }
    }
    let center_basis = hermitian_orthonormal(&central);
    StarAlgebra::from_basis_unchecked(d, center_basis, algebra.unit().cloned())
}

/// Positivity of `a`: Hermitian and spectrum above `-psd_tol`.
pub fn is_positive(a: &ComplexMatrix, tols: &ToleranceConfig) -> CheckResult {
    match min_hermitian_eigenvalue(a, tols.identity_tol) {
        Ok(lambda) => CheckResult::lower_bound("positive", lambda, tols.psd_tol),
        Err(e) => {
            let lambda = min_hermitian_eigenvalue(&a.hermitian_part(), 1.0).unwrap_or(f64::NAN);
            let witness = lambda.min(-a.hermitian_defect());
            CheckResult::lower_bound("positive", witness, tols.psd_tol).with_detail(e.to_string())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActionDescriptor {
    Trivial,
    /// Coordinate permutations: `maps[label][i]` is the image of coordinate `i`.
    Permutation {
        maps: BTreeMap<String, Vec<usize>>,
    },
    /// Conjugation by the given unitaries.
    Unitary {
        maps: BTreeMap<String, JsonMatrix>,
    },
    /// Left translation on `C(G)`; the algebra must have ambient dimension `|G|`.
    Translation,
}

/// An action of `G` on `A` by unitary conjugation, `α_s(x) = U_s x U_s*`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupAction {
    unitaries: Vec<ComplexMatrix>,
}

impl GroupAction {
    /// Takes implementing unitaries for every group element as given. Used for
    /// negative controls; [`build_action`] is the validated path.
    pub fn from_unitaries_unchecked(unitaries: Vec<ComplexMatrix>) -> Self {
        Self { unitaries }
    }

    pub fn trivial(group: &FiniteGroup, dim: usize) -> Self {
        Self {
            unitaries: vec![ComplexMatrix::identity(dim); group.order()],
        }
    }

    pub fn unitary(&self, s: usize) -> &ComplexMatrix {
        &self.unitaries[s]
    }

    pub fn unitaries(&self) -> &[ComplexMatrix] {
        &self.unitaries
    }

    /// `α_s(x)`. Works on any `d x d` matrix, in particular on `Z(A)`.
    pub fn apply(&self, s: usize, x: &ComplexMatrix) -> ComplexMatrix {
        self.unitaries[s].conjugate(x)
    }

    /// Matrix of `α_s` on the algebra basis (column `i` holds the coordinates of
    /// `α_s(b_i)`).
    pub fn matrix_on(&self, algebra: &StarAlgebra, s: usize) -> ComplexMatrix {
        let m = algebra.dim();
        let cols: Vec<Vec<C64>> = algebra
            .basis()
            .iter()
            .map(|b| algebra.coords(&self.apply(s, b)))
            .collect();
        ComplexMatrix::from_fn(m, m, |i, j| cols[j][i])
    }

    /// Checks the action axioms on `algebra`: each `α_s` maps `A` into itself,
    /// `α_e = id`, and `α_s α_t = α_{st}` on the basis. Multiplicativity and
    /// *-compatibility hold by construction for unitary conjugation, and are
    /// verified on basis products as well.
    pub fn validate(&self, group: &FiniteGroup, algebra: &StarAlgebra, tol: f64) -> Result<()> {
        if self.unitaries.len() != group.order() {
            return Err(Error::InvalidAction(format!(
                "expected {} implementing unitaries, got {}",
                group.order(),
                self.unitaries.len()
            )));
        }
        let d = algebra.ambient_dim();
        for (s, u) in self.unitaries.iter().enumerate() {
            if u.shape() != (d, d) {
                return Err(Error::InvalidAction(format!("unitary for {s} is not {d}x{d}")));
            }
            let defect = u.adjoint().matmul(u).max_abs_diff(&ComplexMatrix::identity(d));
            if defect > tol {
                return Err(Error::InvalidAction(format!(
                    "implementing matrix for {:?} is not unitary (defect {defect:.3e})",
                    group.label(s)
                )));
            }
        }
        for s in group.elements() {
            for b in algebra.basis() {
                let image = self.apply(s, b);
                if algebra.membership_residual(&image) > tol {
                    return Err(Error::InvalidAction(format!(
                        "α_{} does not preserve the algebra",
                        group.label(s)
                    )));
                }
            }
        }
        let e = group.identity();
        for b in algebra.basis() {
            if self.apply(e, b).max_abs_diff(b) > tol {
                return Err(Error::InvalidAction("α_e is not the identity".into()));
            }
        }
        for s in group.elements() {
            for t in group.elements() {
                let st = group.mul(s, t);
                for b in algebra.basis() {
                    let lhs = self.apply(s, &self.apply(t, b));
                    if lhs.max_abs_diff(&self.apply(st, b)) > tol {
                        return Err(Error::InvalidAction(format!(
                            "α_{} α_{} ≠ α_{}",
                            group.label(s),
                            group.label(t),
                            group.label(st)
                        )));
                    }
                }
            }
        }
        for x in algebra.basis() {
            for y in algebra.basis() {
                for s in group.elements() {
                    let lhs = self.apply(s, &x.matmul(y));
                    let rhs = self.apply(s, x).matmul(&self.apply(s, y));
                    if lhs.max_abs_diff(&rhs) > tol {
                        return Err(Error::InvalidAction("α is not multiplicative".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Builds and validates an action. Maps given for a subset of elements are
/// extended to the generated subgroup by multiplication; inconsistent
/// extensions and elements left unreached are errors.
pub fn build_action(
    group: &FiniteGroup,
    algebra: &StarAlgebra,
    descriptor: &ActionDescriptor,
    tols: &ToleranceConfig,
) -> Result<GroupAction> {
    let d = algebra.ambient_dim();
    let tol = tols.identity_tol;
    let generators: Vec<(usize, ComplexMatrix)> = match descriptor {
        ActionDescriptor::Trivial => return checked(GroupAction::trivial(group, d), group, algebra, tol),
        ActionDescriptor::Translation => {
            if d != group.order() {
                return Err(Error::InvalidAction(format!(
                    "translation action needs ambient dimension |G| = {}, got {d}",
                    group.order()
                )));
            }
            let unitaries = group
                .elements()
                .map(|s| group.regular_unitary(s))
                .collect::<Result<Vec<_>>>()?;
            return checked(GroupAction { unitaries }, group, algebra, tol);
        }
        ActionDescriptor::Permutation { maps } => maps
            .iter()
            .map(|(label, perm)| {
                let s = group.index_of(label).map_err(|e| Error::InvalidAction(e.to_string()))?;
                Ok((s, permutation_unitary(perm, d)?))
            })
            .collect::<Result<_>>()?,
        ActionDescriptor::Unitary { maps } => maps
            .iter()
            .map(|(label, m)| {
                let s = group.index_of(label).map_err(|e| Error::InvalidAction(e.to_string()))?;
                let u = m.to_matrix().map_err(|e| Error::InvalidAction(e.to_string()))?;
                Ok((s, u))
            })
            .collect::<Result<_>>()?,
    };
    for (s, u) in &generators {
        if u.shape() != (d, d) {
            return Err(Error::InvalidAction(format!(
                "matrix for {:?} must be {d}x{d}",
                group.label(*s)
            )));
        }
        let defect = u.adjoint().matmul(u).max_abs_diff(&ComplexMatrix::identity(d));
        if defect > tol {
            return Err(Error::InvalidAction(format!(
                "matrix for {:?} is not unitary (defect {defect:.3e})",
                group.label(*s)
            )));
        }
    }
    let n = group.order();
    let mut known: Vec<Option<ComplexMatrix>> = vec![None; n];
    known[group.identity()] = Some(ComplexMatrix::identity(d));
    let mut queue = VecDeque::from([group.identity()]);
    while let Some(a) = queue.pop_front() {
        let ua = known[a].clone().expect("queued elements are known");
        for (g, ug) in &generators {
            let ga = group.mul(*g, a);
            let candidate = ug.matmul(&ua);
            match &known[ga] {
                Some(existing) => {
                    for b in algebra.basis() {
                        if existing.conjugate(b).max_abs_diff(&candidate.conjugate(b)) > tol {
                            return Err(Error::InvalidAction(format!(
                                "maps are not a homomorphism: two products give different α_{}",
                                group.label(ga)
                            )));
                        }
                    }
                }
                None => {
                    known[ga] = Some(candidate);
                    queue.push_back(ga);
                }
            }
        }
    }
    let unitaries = known
        .into_iter()
        .enumerate()
        .map(|(s, u)| {
            u.ok_or_else(|| {
                Error::InvalidAction(format!(
                    "element {:?} is not generated by the given maps",
                    group.label(s)
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    checked(GroupAction { unitaries }, group, algebra, tol)
}

fn checked(action: GroupAction, group: &FiniteGroup, algebra: &StarAlgebra, tol: f64) -> Result<GroupAction> {
    action.validate(group, algebra, tol)?;
    Ok(action)
}

/// Permutation matrix sending `e_i` to `e_{perm[i]}`.
pub fn permutation_unitary(perm: &[usize], d: usize) -> Result<ComplexMatrix> {
    if perm.len() != d {
        return Err(Error::InvalidAction(format!(
            "permutation has length {}, expected {d}",
            perm.len()
        )));
    }
    let mut seen = vec![false; d];
    let mut u = ComplexMatrix::zeros(d, d);
    for (i, &p) in perm.iter().enumerate() {
        if p >= d || seen[p] {
            return Err(Error::InvalidAction(format!("{perm:?} is not a permutation")));
        }
        seen[p] = true;
        u[(p, i)] = ONE;
    }
    Ok(u)
}

/// A state on a unital algebra, stored by its values `ρ(b_i)` on the basis.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    algebra: StarAlgebra,
    values: Vec<C64>,
}

impl State {
    /// Validates `ρ(1) = 1` and positivity of the Gram matrix `[ρ(b_i* b_j)]`.
    pub fn from_values(algebra: &StarAlgebra, values: Vec<C64>, tols: &ToleranceConfig) -> Result<Self> {
        if values.len() != algebra.dim() {
            return Err(Error::InvalidInput(format!(
                "state needs {} values, got {}",
                algebra.dim(),
                values.len()
            )));
        }
        let state = Self {
            algebra: algebra.clone(),
            values,
        };
        let unit = algebra
            .unit()
            .ok_or_else(|| Error::NotUnital("states need a unital algebra".into()))?;
        let at_unit = state.evaluate(unit);
        if (at_unit - ONE).norm() > tols.identity_tol {
            return Err(Error::InvalidInput(format!(
                "state is not normalized: ρ(1) = {at_unit}"
            )));
        }
        let positivity = state.positivity(tols);
        if !positivity.pass {
            return Err(Error::InvalidInput(format!(
                "functional is not positive (min Gram eigenvalue {:.3e})",
                positivity.value
            )));
        }
        Ok(state)
    }

    /// `ρ(x) = tr(D x)`.
    pub fn from_density(algebra: &StarAlgebra, density: &ComplexMatrix, tols: &ToleranceConfig) -> Result<Self> {
        let values = algebra.basis().iter().map(|b| density.matmul(b).trace()).collect();
        Self::from_values(algebra, values, tols)
    }

    /// `ρ(x) = tr(x)/d`.
    pub fn normalized_trace(algebra: &StarAlgebra) -> Result<Self> {
        let d = algebra.ambient_dim();
        Self::from_density(
            algebra,
            &ComplexMatrix::identity(d).scale_real(1.0 / d as f64),
            &ToleranceConfig::default(),
        )
    }

    pub fn algebra(&self) -> &StarAlgebra {
        &self.algebra
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn evaluate(&self, x: &ComplexMatrix) -> C64 {
        self.algebra
            .coords(x)
            .iter()
            .zip(&self.values)
            .map(|(c, v)| c * v)
            .sum()
    }

    /// Minimum eigenvalue of `[ρ(b_i* b_j)]`.
    pub fn positivity(&self, tols: &ToleranceConfig) -> CheckResult {
        let basis = self.algebra.basis();
        let m = basis.len();
        let gram = ComplexMatrix::from_fn(m, m, |i, j| self.evaluate(&basis[i].adjoint().matmul(&basis[j])));
        is_positive(&gram, tols).renamed("state/positive")
    }
}

impl CheckResult {
    pub(crate) fn renamed(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }
}

/// `max_{s,i} |ρ(α_s(b_i)) − ρ(b_i)|` against `identity_tol`.
pub fn check_invariant_state(
    state: &State,
    group: &FiniteGroup,
    action: &GroupAction,
    tols: &ToleranceConfig,
) -> CheckResult {
    let mut worst: f64 = 0.0;
    for s in group.elements() {
        for b in state.algebra().basis() {
            let diff = state.evaluate(&action.apply(s, b)) - state.evaluate(b);
            worst = worst.max(diff.norm());
        }
    }
    CheckResult::residual("state/invariant", worst, tols.identity_tol)
}

/// Spectral norm of an algebra element.
pub fn element_norm(x: &ComplexMatrix) -> f64 {
    norm(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_combination, seeded};

    fn swap2() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    fn tols() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn standard_algebras() {
        let d = build_algebra(&AlgebraDescriptor::Diagonal { dim: 2 }).unwrap();
        assert_eq!(d.dim(), 2);
        assert_eq!(d.basis()[0], ComplexMatrix::unit(2, 0, 0));
        assert_eq!(d.basis()[1], ComplexMatrix::unit(2, 1, 1));
        let f = build_algebra(&AlgebraDescriptor::FullMatrix { dim: 2 }).unwrap();
        assert_eq!(f.dim(), 4);
        assert!(f.closure_residual().unwrap() < 1e-14);
    }

    #[test]
    fn span_of_swap_closes_to_identity_and_swap() {
        let alg = span_closure(2, &[swap2()]).unwrap();
        assert_eq!(alg.dim(), 2);
        assert!(alg.contains(&ComplexMatrix::identity(2), 1e-12));
        assert!(alg.contains(&swap2(), 1e-12));
        assert!(!alg.contains(&ComplexMatrix::unit(2, 0, 0), 1e-6));
        assert!(alg.closure_residual().unwrap() < 1e-12);
    }

    #[test]
    fn span_without_unit_is_rejected() {
        let err = span_closure(2, &[ComplexMatrix::unit(2, 0, 0)]).unwrap_err();
        assert!(matches!(err, Error::NotUnital(_)));
    }

    #[test]
    fn span_of_noncommuting_generators_is_full() {
        let sigma_x = swap2();
        let sigma_z = ComplexMatrix::real_diag(&[1.0, -1.0]);
        let alg = span_closure(2, &[sigma_x, sigma_z]).unwrap();
        assert_eq!(alg.dim(), 4);
    }

    #[test]
    fn centers() {
        let c = center(&full_matrix(2).unwrap()).unwrap();
        assert_eq!(c.dim(), 1);
        assert!(c.contains(&ComplexMatrix::identity(2), 1e-12));

        let c = center(&diagonal(3).unwrap()).unwrap();
        assert_eq!(c.dim(), 3);
        for k in 0..3 {
            assert!(c.contains(&ComplexMatrix::unit(3, k, k), 1e-12));
        }

        // M_2 ⊕ M_1 inside M_3: center is spanned by the two block units.
        let mut gens: Vec<ComplexMatrix> = (0..4).map(|k| ComplexMatrix::unit(3, k / 2, k % 2)).collect();
        gens.push(ComplexMatrix::unit(3, 2, 2));
        let block = span_closure(3, &gens).unwrap();
        assert_eq!(block.dim(), 5);
        let c = center(&block).unwrap();
        assert_eq!(c.dim(), 2);
        assert!(c.contains(&ComplexMatrix::real_diag(&[1.0, 1.0, 0.0]), 1e-10));
        assert!(c.contains(&ComplexMatrix::unit(3, 2, 2), 1e-10));
    }

    #[test]
    fn center_commutes_with_random_elements() {
        let mut gens: Vec<ComplexMatrix> = (0..4).map(|k| ComplexMatrix::unit(3, k / 2, k % 2)).collect();
        gens.push(ComplexMatrix::unit(3, 2, 2));
        let a = span_closure(3, &gens).unwrap();
        let z = center(&a).unwrap();
        let mut rng = seeded(21);
        for _ in 0..500 {
            let x = random_combination(&mut rng, z.basis());
            let b = random_combination(&mut rng, a.basis());
            assert!(x.matmul(&b).max_abs_diff(&b.matmul(&x)) <= 1e-9);
        }
    }

    #[test]
    fn positivity_examples() {
        let t = tols();
        assert!(is_positive(&ComplexMatrix::real_diag(&[1.0, 2.0]), &t).pass);
        let neg = is_positive(&ComplexMatrix::real_diag(&[1.0, -0.5]), &t);
        assert!(!neg.pass);
        assert!((neg.value + 0.5).abs() < 1e-14);
        let mut rng = seeded(2);
        let a = full_matrix(3).unwrap();
        for _ in 0..50 {
            let b = random_combination(&mut rng, a.basis());
            assert!(is_positive(&b.adjoint().matmul(&b), &t).pass);
        }
        let nonherm = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(!is_positive(&nonherm, &t).pass);
    }

    fn z2() -> FiniteGroup {
        FiniteGroup::cyclic(2).unwrap()
    }

    #[test]
    fn swap_action_on_diagonal() {
        let g = z2();
        let a = diagonal(2).unwrap();
        let desc = ActionDescriptor::Permutation {
            maps: BTreeMap::from([("1".to_string(), vec![1, 0])]),
        };
        let alpha = build_action(&g, &a, &desc, &tols()).unwrap();
        let x = ComplexMatrix::real_diag(&[3.0, 7.0]);
        assert_eq!(alpha.apply(1, &x), ComplexMatrix::real_diag(&[7.0, 3.0]));
        assert_eq!(alpha.apply(0, &x), x);
    }

    #[test]
    fn trivial_action_is_valid() {
        let g = FiniteGroup::symmetric(3).unwrap();
        let a = full_matrix(2).unwrap();
        let alpha = build_action(&g, &a, &ActionDescriptor::Trivial, &tols()).unwrap();
        assert_eq!(alpha.unitaries().len(), 6);
    }

    #[test]
    fn non_unitary_is_rejected() {
        let g = z2();
        let a = full_matrix(2).unwrap();
        let desc = ActionDescriptor::Unitary {
            maps: BTreeMap::from([(
                "1".to_string(),
                JsonMatrix(vec![vec![[2.0, 0.0], [0.0, 0.0]], vec![[0.0, 0.0], [1.0, 0.0]]]),
            )]),
        };
        assert!(matches!(
            build_action(&g, &a, &desc, &tols()),
            Err(Error::InvalidAction(_))
        ));
    }

    #[test]
    fn inconsistent_generators_are_rejected() {
        // Z/2 with the generator acting by a 3-cycle: α_g² ≠ id.
        let g = z2();
        let a = diagonal(3).unwrap();
        let desc = ActionDescriptor::Permutation {
            maps: BTreeMap::from([("1".to_string(), vec![1, 2, 0])]),
        };
        assert!(matches!(
            build_action(&g, &a, &desc, &tols()),
            Err(Error::InvalidAction(_))
        ));
    }

    #[test]
    fn action_must_preserve_algebra() {
        let g = z2();
        let a = diagonal(2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let desc = ActionDescriptor::Unitary {
            maps: BTreeMap::from([(
                "1".to_string(),
                JsonMatrix(vec![vec![[h, 0.0], [h, 0.0]], vec![[h, 0.0], [-h, 0.0]]]),
            )]),
        };
        assert!(matches!(
            build_action(&g, &a, &desc, &tols()),
            Err(Error::InvalidAction(_))
        ));
    }

    #[test]
    fn generated_maps_cover_cyclic_group() {
        let g = FiniteGroup::cyclic(3).unwrap();
        let a = diagonal(3).unwrap();
        let desc = ActionDescriptor::Permutation {
            maps: BTreeMap::from([("1".to_string(), vec![1, 2, 0])]),
        };
        let alpha = build_action(&g, &a, &desc, &tols()).unwrap();
        let x = ComplexMatrix::real_diag(&[1.0, 2.0, 3.0]);
        assert_eq!(alpha.apply(2, &x), alpha.apply(1, &alpha.apply(1, &x)));
    }

    #[test]
    fn invariant_states() {
        let g = z2();
        let a = diagonal(2).unwrap();
        let desc = ActionDescriptor::Permutation {
            maps: BTreeMap::from([("1".to_string(), vec![1, 0])]),
        };
        let alpha = build_action(&g, &a, &desc, &tols()).unwrap();
        let uniform = State::from_values(&a, vec![C64::new(0.5, 0.0); 2], &tols()).unwrap();
        assert!(check_invariant_state(&uniform, &g, &alpha, &tols()).pass);
        let first = State::from_values(&a, vec![ONE, ZERO], &tols()).unwrap();
        assert!(!check_invariant_state(&first, &g, &alpha, &tols()).pass);

        let full = full_matrix(2).unwrap();
        let mut rng = seeded(4);
        let u = crate::random::random_unitary(&mut rng, 2);
        let tr = State::normalized_trace(&full).unwrap();
        for b in full.basis() {
            let moved = u.conjugate(b);
            assert!((tr.evaluate(&moved) - tr.evaluate(b)).norm() < 1e-12);
        }
        let flip = ActionDescriptor::Unitary {
            maps: BTreeMap::from([("1".to_string(), JsonMatrix::from_matrix(&swap2()))]),
        };
        let alpha = build_action(&g, &full, &flip, &tols()).unwrap();
        assert!(check_invariant_state(&tr, &g, &alpha, &tols()).pass);
    }

    #[test]
    fn states_reject_non_positive_functionals() {
        let a = diagonal(2).unwrap();
        let err = State::from_values(&a, vec![C64::new(1.5, 0.0), C64::new(-0.5, 0.0)], &tols());
        assert!(err.is_err());
        let err = State::from_values(&a, vec![C64::new(0.7, 0.0), C64::new(0.7, 0.0)], &tols());
        assert!(err.is_err());
    }

    #[test]
    fn states_satisfy_cauchy_schwarz() {
        let a = full_matrix(2).unwrap();
        let density = ComplexMatrix::real_diag(&[0.3, 0.7]);
        let rho = State::from_density(&a, &density, &tols()).unwrap();
        let mut rng = seeded(8);
        for _ in 0..200 {
            let x = random_combination(&mut rng, a.basis());
            let y = random_combination(&mut rng, a.basis());
            let lhs = rho.evaluate(&y.adjoint().matmul(&x)).norm_sqr();
            let rhs = rho.evaluate(&x.adjoint().matmul(&x)).re * rho.evaluate(&y.adjoint().matmul(&y)).re;
            assert!(lhs <= rhs + 1e-9);
        }
    }

    #[test]
    fn automorphisms_preserve_positivity() {
        let g = FiniteGroup::cyclic(3).unwrap();
        let a = diagonal(3).unwrap();
        let desc = ActionDescriptor::Permutation {
            maps: BTreeMap::from([("1".to_string(), vec![1, 2, 0])]),
        };
        let alpha = build_action(&g, &a, &desc, &tols()).unwrap();
        let mut rng = seeded(13);
        for _ in 0..100 {
            let b = random_combination(&mut rng, a.basis());
            let p = b.adjoint().matmul(&b);
            for s in g.elements() {
                assert!(is_positive(&alpha.apply(s, &p), &tols()).pass);
            }
        }
    }
}
