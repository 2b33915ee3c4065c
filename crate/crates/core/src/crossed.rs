//! The reduced crossed product `A ⋊_r G` on `H ⊗ ℓ²(G)`, its conditional
//! expectation, and the module and `G`-actions on the crossed product and on
//! windowed matrix algebras `A ⊗ B(ℓ²(W))`.
//!
//! Index convention for `H ⊗ ℓ²(X)`: the algebra index is major, so the basis
//! vector `ξ_i ⊗ δ_x` sits at position `i * |X| + x`.

use rand::Rng;

use crate::algebras::{GroupAction, StarAlgebra};
use crate::check::CheckResult;
use crate::error::{Error, Result};
use crate::groups::{FiniteGroup, Window};
use crate::linalg::{kron, norm, ComplexMatrix, ToleranceConfig};
use crate::random::{random_combination, seeded};

/// `Σ_s a_s s` with every coefficient slot present (zero coefficients
/// included).
#[derive(Debug, Clone, PartialEq)]
pub struct CrossedElement {
    coeffs: Vec<ComplexMatrix>,
}

impl CrossedElement {
    pub fn coeffs(&self) -> &[ComplexMatrix] {
        &self.coeffs
    }

    pub fn coeff(&self, s: usize) -> &ComplexMatrix {
        &self.coeffs[s]
    }

    pub fn scale(&self, c: crate::linalg::C64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| a.scale(c)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        }
    }

    /// Largest entrywise difference over all coefficients.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }
}

/// An element of `A ⊗ B(ℓ²(W))`, stored as the `|W| x |W|` array of entries
/// `m_{s,t} ∈ A` in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedMatrix {
    window: Window,
    dim: usize,
    blocks: Vec<ComplexMatrix>,
}

impl WindowedMatrix {
    pub fn new(window: Window, blocks: Vec<ComplexMatrix>) -> Result<Self> {
        let n = window.len();
        if blocks.len() != n * n {
            return Err(Error::InvalidInput(format!(
                "window of size {n} needs {} entries, got {}",
                n * n,
                blocks.len()
            )));
        }
        let dim = blocks[0].rows();
        if blocks.iter().any(|b| b.shape() != (dim, dim)) {
            return Err(Error::InvalidInput("window entries differ in size".into()));
        }
        Ok(Self { window, dim, blocks })
    }

    pub fn zeros(window: Window, dim: usize) -> Self {
        let n = window.len();
        Self {
            window,
            dim,
            blocks: vec![ComplexMatrix::zeros(dim, dim); n * n],
        }
    }

    /// `a ⊗ e_{p,q}` with `p, q` positions in the window.
    pub fn matrix_unit(window: Window, p: usize, q: usize, a: ComplexMatrix) -> Self {
        let mut m = Self::zeros(window, a.rows());
        let n = m.window.len();
        m.blocks[p * n + q] = a;
        m
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn entry_dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, p: usize, q: usize) -> &ComplexMatrix {
        &self.blocks[p * self.window.len() + q]
    }

    pub fn entries(&self) -> &[ComplexMatrix] {
        &self.blocks
    }

    /// `Σ kron(m_{s,t}, e_{s,t})`.
    pub fn to_matrix(&self) -> ComplexMatrix {
        let n = self.window.len();
        let d = self.dim;
        let mut out = ComplexMatrix::zeros(d * n, d * n);
        for p in 0..n {
            for q in 0..n {
                let b = &self.blocks[p * n + q];
                for i in 0..d {
                    for j in 0..d {
                        out[(i * n + p, j * n + q)] = b[(i, j)];
                    }
                }
            }
        }
        out
    }

    /// Inverse of [`WindowedMatrix::to_matrix`].
    pub fn from_matrix(window: Window, dim: usize, m: &ComplexMatrix) -> Result<Self> {
        let n = window.len();
        if m.shape() != (dim * n, dim * n) {
            return Err(Error::InvalidInput(format!(
                "expected a {0}x{0} matrix for the window",
                dim * n
            )));
        }
        let blocks = (0..n * n)
            .map(|k| {
                let (p, q) = (k / n, k % n);
                ComplexMatrix::from_fn(dim, dim, |i, j| m[(i * n + p, j * n + q)])
            })
            .collect();
        Ok(Self { window, dim, blocks })
    }

    pub fn adjoint(&self) -> Self {
        let n = self.window.len();
        let blocks = (0..n * n).map(|k| self.blocks[(k % n) * n + k / n].adjoint()).collect();
        Self {
            window: self.window.clone(),
            dim: self.dim,
            blocks,
        }
    }
}

/// `(A, G, α)` together with the regular representation of `A ⋊_r G`.
#[derive(Debug, Clone)]
pub struct CrossedSystem {
    algebra: StarAlgebra,
    group: FiniteGroup,
    action: GroupAction,
    tols: ToleranceConfig,
    lambdas: Vec<ComplexMatrix>,
    crossed: StarAlgebra,
}

impl CrossedSystem {
    /// Builds the system and verifies covariance
    /// `λ_s π(b) λ_s* = π(α_s(b))` on the basis of `A`.
    pub fn new(algebra: StarAlgebra, group: FiniteGroup, action: GroupAction, tols: ToleranceConfig) -> Result<Self> {
        let sys = Self::new_unchecked(algebra, group, action, tols)?;
        let residual = sys.covariance_residual();
        if residual > sys.tols.identity_tol {
            return Err(Error::InternalError(format!(
                "covariance fails (residual {residual:.3e}); the action is not valid"
            )));
        }
        Ok(sys)
    }

    /// Builds the system without testing covariance, for negative controls.
    pub fn new_unchecked(
        algebra: StarAlgebra,
        group: FiniteGroup,
        action: GroupAction,
        tols: ToleranceConfig,
    ) -> Result<Self> {
        if action.unitaries().len() != group.order() {
            return Err(Error::InvalidAction(format!(
                "action has {} maps for a group of order {}",
                action.unitaries().len(),
                group.order()
            )));
        }
        let d = algebra.ambient_dim();
        let lambdas = group
            .elements()
            .map(|s| Ok(kron(&ComplexMatrix::identity(d), &group.regular_unitary(s)?)))
            .collect::<Result<Vec<_>>>()?;
        let mut sys = Self {
            crossed: algebra.clone(),
            algebra,
            group,
            action,
            tols,
            lambdas,
        };
        let mut basis = Vec::with_capacity(sys.group.order() * sys.algebra.dim());
        for s in sys.group.elements() {
            for b in sys.algebra.basis() {
                basis.push(sys.represent(&sys.monomial(b.clone(), s)));
            }
        }
        let n = sys.ambient_dim();
        sys.crossed = StarAlgebra::from_basis_unchecked(n, basis, Some(ComplexMatrix::identity(n)))?;
        Ok(sys)
    }

    pub fn algebra(&self) -> &StarAlgebra {
        &self.algebra
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn action(&self) -> &GroupAction {
        &self.action
    }

    pub fn tolerances(&self) -> &ToleranceConfig {
        &self.tols
    }

    /// `d`, the size of matrices in `A`.
    pub fn dim(&self) -> usize {
        self.algebra.ambient_dim()
    }

    /// `d |G|`.
    pub fn ambient_dim(&self) -> usize {
        self.dim() * self.group.order()
    }

    /// `1 ⊗ λ_s`.
    pub fn lambda(&self, s: usize) -> &ComplexMatrix {
        &self.lambdas[s]
    }

    /// The represented crossed product as a concrete algebra; basis
    /// `represent(b_i s)` with index `s * dim(A) + i`.
    pub fn crossed_algebra(&self) -> &StarAlgebra {
        &self.crossed
    }

    pub fn alpha(&self, s: usize, a: &ComplexMatrix) -> ComplexMatrix {
        self.action.apply(s, a)
    }

    /// `π(a) = Σ_t α_{t⁻¹}(a) ⊗ e_{t,t}`.
    pub fn pi(&self, a: &ComplexMatrix) -> ComplexMatrix {
        let g = &self.group;
        let n = g.order();
        let d = self.dim();
        let mut out = ComplexMatrix::zeros(d * n, d * n);
        for t in g.elements() {
            let block = self.alpha(g.inv(t), a);
            for i in 0..d {
                for j in 0..d {
                    out[(i * n + t, j * n + t)] = block[(i, j)];
                }
            }
        }
        out
    }

    /// `Σ_{s,t} α_{t⁻¹}(a_s) ⊗ e_{t, s⁻¹t}`.
    pub fn represent(&self, x: &CrossedElement) -> ComplexMatrix {
        let g = &self.group;
        let n = g.order();
        let d = self.dim();
        let mut out = ComplexMatrix::zeros(d * n, d * n);
        for (s, a) in x.coeffs.iter().enumerate() {
            if a.max_abs() == 0.0 {
                continue;
            }
            for t in g.elements() {
                let u = g.mul(g.inv(s), t);
                let block = self.alpha(g.inv(t), a);
                for i in 0..d {
                    for j in 0..d {
                        out[(i * n + t, j * n + u)] = block[(i, j)];
                    }
                }
            }
        }
        out
    }

    /// Reads the coefficients back from a represented element; the `(e, u)`
    /// block of `represent(x)` is `a_{u⁻¹}`. Fails if `m` is not in the image.
    pub fn decompose(&self, m: &ComplexMatrix) -> Result<CrossedElement> {
        let n = self.ambient_dim();
        if m.shape() != (n, n) {
            return Err(Error::InvalidInput(format!("expected a {n}x{n} matrix")));
        }
        let x = self.coefficients(m);
        let residual = self.represent(&x).max_abs_diff(m);
        if residual > self.tols.identity_tol * (1.0 + m.max_abs()) {
            return Err(Error::InvalidInput(format!(
                "matrix is not in the crossed product (residual {residual:.3e})"
            )));
        }
        Ok(x)
    }

    /// The coefficients read from the `(e, u)` blocks, without checking that
    /// `m` lies in the crossed product.
    pub fn coefficients(&self, m: &ComplexMatrix) -> CrossedElement {
        let g = &self.group;
        let n = g.order();
        let d = self.dim();
        let e = g.identity();
        let coeffs = g
            .elements()
            .map(|s| {
                let u = g.inv(s);
                ComplexMatrix::from_fn(d, d, |i, j| m[(i * n + e, j * n + u)])
            })
            .collect();
        CrossedElement { coeffs }
    }

    pub fn covariance_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for s in self.group.elements() {
            for b in self.algebra.basis() {
                let lhs = self.lambdas[s].conjugate(&self.pi(b));
                worst = worst.max(lhs.max_abs_diff(&self.pi(&self.alpha(s, b))));
            }
        }
        worst
    }

    fn check_in_algebra(&self, a: &ComplexMatrix) -> Result<()> {
        if !self.algebra.contains(a, self.tols.identity_tol) {
            return Err(Error::InvalidInput("coefficient is not in A".into()));
        }
        Ok(())
    }

    pub fn element(&self, coeffs: Vec<ComplexMatrix>) -> Result<CrossedElement> {
        if coeffs.len() != self.group.order() {
            return Err(Error::InvalidInput(format!(
                "expected {} coefficients, got {}",
                self.group.order(),
                coeffs.len()
            )));
        }
        for a in &coeffs {
            self.check_in_algebra(a)?;
        }
        Ok(CrossedElement { coeffs })
    }

    pub fn zero(&self) -> CrossedElement {
        let d = self.dim();
        CrossedElement {
            coeffs: vec![ComplexMatrix::zeros(d, d); self.group.order()],
        }
    }

    pub fn one(&self) -> CrossedElement {
        self.monomial(ComplexMatrix::identity(self.dim()), self.group.identity())
    }

    /// `a s`.
    pub fn monomial(&self, a: ComplexMatrix, s: usize) -> CrossedElement {
        let mut x = self.zero();
        x.coeffs[s] = a;
        x
    }

    /// Coefficients drawn independently as random combinations of the basis.
    pub fn random_element(&self, rng: &mut impl Rng) -> CrossedElement {
        CrossedElement {
            coeffs: self
                .group
                .elements()
                .map(|_| random_combination(rng, self.algebra.basis()))
                .collect(),
        }
    }

    pub fn random_algebra_element(&self, rng: &mut impl Rng) -> ComplexMatrix {
        random_combination(rng, self.algebra.basis())
    }

    /// `(as)(bt) = a α_s(b) st`.
    pub fn mul(&self, x: &CrossedElement, y: &CrossedElement) -> CrossedElement {
        let mut out = self.zero();
        for (s, a) in x.coeffs.iter().enumerate() {
            for (t, b) in y.coeffs.iter().enumerate() {
                let st = self.group.mul(s, t);
                out.coeffs[st] += &a.matmul(&self.alpha(s, b));
            }
        }
        out
    }

    /// `(as)* = α_{s⁻¹}(a*) s⁻¹`.
    pub fn adjoint(&self, x: &CrossedElement) -> CrossedElement {
        let g = &self.group;
        CrossedElement {
            coeffs: g
                .elements()
                .map(|u| self.alpha(u, &x.coeffs[g.inv(u)].adjoint()))
                .collect(),
        }
    }

    /// `𝔼(Σ a_s s) = a_e`.
    pub fn expectation(&self, x: &CrossedElement) -> ComplexMatrix {
        x.coeffs[self.group.identity()].clone()
    }

    /// Reduced norm: the spectral norm of the regular representation.
    pub fn norm(&self, x: &CrossedElement) -> f64 {
        norm(&self.represent(x))
    }

    /// `(Σ a_s s)·b = Σ a_s α_s(b) s`.
    pub fn module_act(&self, x: &CrossedElement, b: &ComplexMatrix) -> Result<CrossedElement> {
        self.check_in_algebra(b)?;
        Ok(CrossedElement {
            coeffs: x
                .coeffs
                .iter()
                .enumerate()
                .map(|(s, a)| a.matmul(&self.alpha(s, b)))
                .collect(),
        })
    }

    /// `r·(a s) = α_r(a) r s r⁻¹`.
    pub fn g_act(&self, r: usize, x: &CrossedElement) -> Result<CrossedElement> {
        let g = &self.group;
        g.check(r)?;
        let mut out = self.zero();
        for (s, a) in x.coeffs.iter().enumerate() {
            out.coeffs[g.conj(r, s)] = self.alpha(r, a);
        }
        Ok(out)
    }

    /// `π_W(b) = Σ_{t∈W} α_{bar(t)⁻¹}(b) ⊗ e_{t,t}`, the operator implementing
    /// the right `A`-action on `A ⊗ B(ℓ²(W))`.
    pub fn window_pi(&self, window: &Window, b: &ComplexMatrix) -> Result<ComplexMatrix> {
        let g = &self.group;
        let bars = window.bars(g)?;
        let blocks = (0..window.len() * window.len())
            .map(|k| {
                let (p, q) = (k / window.len(), k % window.len());
                if p == q {
                    self.alpha(g.inv(bars[p]), b)
                } else {
                    ComplexMatrix::zeros(self.dim(), self.dim())
                }
            })
            .collect();
        Ok(WindowedMatrix::new(window.clone(), blocks)?.to_matrix())
    }

    /// `(a ⊗ e_{s,t})·b = a α_{bar(t)⁻¹}(b) ⊗ e_{s,t}`.
    pub fn module_act_window(&self, m: &WindowedMatrix, b: &ComplexMatrix) -> Result<WindowedMatrix> {
        self.check_in_algebra(b)?;
        let g = &self.group;
        let bars = m.window.bars(g)?;
        let n = m.window.len();
        let blocks = m
            .blocks
            .iter()
            .enumerate()
            .map(|(k, a)| a.matmul(&self.alpha(g.inv(bars[k % n]), b)))
            .collect();
        WindowedMatrix::new(m.window.clone(), blocks)
    }

    /// `r·(a ⊗ e_{s,t}) = a ⊗ e_{rs,rt}`; the window must be closed under `r`.
    pub fn g_act_window(&self, r: usize, m: &WindowedMatrix) -> Result<WindowedMatrix> {
        let perm = m.window.translation_permutation(&self.group, r)?;
        let n = m.window.len();
        let mut out = WindowedMatrix::zeros(m.window.clone(), m.dim);
        for p in 0..n {
            for q in 0..n {
                out.blocks[perm[p] * n + perm[q]] = m.blocks[p * n + q].clone();
            }
        }
        Ok(out)
    }

    /// `1 ⊗ U_r` on `H ⊗ ℓ²(W)`.
    pub fn window_translation(&self, r: usize, window: &Window) -> Result<ComplexMatrix> {
        Ok(kron(
            &ComplexMatrix::identity(self.dim()),
            &self.group.translation_unitary(r, window)?,
        ))
    }

    /// `M_F(A)` as a subalgebra of `A ⊗ B(ℓ²(W))` for `F ⊆ W`; basis
    /// `b_i ⊗ e_{p,q}` with index `(p |F| + q) dim(A) + i` over positions of
    /// `F`, unit `1 ⊗ P_F`.
    pub fn window_algebra(&self, ambient: &Window, sub: &Window) -> Result<StarAlgebra> {
        if !sub.is_subwindow_of(ambient) {
            return Err(Error::InvalidInput(
                "window is not contained in the ambient window".into(),
            ));
        }
        let positions: Vec<usize> = sub
            .tuples()
            .iter()
            .map(|t| ambient.position(t).expect("checked subwindow"))
            .collect();
        let n = ambient.len();
        let mut basis = Vec::with_capacity(positions.len().pow(2) * self.algebra.dim());
        for &p in &positions {
            for &q in &positions {
                for b in self.algebra.basis() {
                    basis.push(kron(b, &ComplexMatrix::unit(n, p, q)));
                }
            }
        }
        let mut projection = ComplexMatrix::zeros(n, n);
        for &p in &positions {
            projection[(p, p)] = crate::linalg::ONE;
        }
        let unit = self.algebra.unit().map(|u| kron(u, &projection));
        StarAlgebra::from_basis_unchecked(self.dim() * n, basis, unit)
    }
}

/// Checks `r·(x·b) = (r·x)·α_r(b)` on the crossed product and
/// `r·(m·b) = (r·m)·α_r(b)` on `A ⊗ B(ℓ²(W))` over `trials` random inputs.
/// Left sides use coefficient formulas, right sides the concrete operators.
pub fn check_compatibility(sys: &CrossedSystem, window: &Window, trials: usize, seed: u64) -> Result<CheckResult> {
    let g = sys.group();
    for r in g.elements() {
        window.translation_permutation(g, r)?;
    }
    let mut rng = seeded(seed);
    let n = window.len();
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let r = rng.gen_range(0..g.order());
        let s = rng.gen_range(0..g.order());
        let a = sys.random_algebra_element(&mut rng);
        let b = sys.random_algebra_element(&mut rng);
        let alpha_r_b = sys.alpha(r, &b);

        let x = sys.monomial(a.clone(), s);
        let lhs = sys.represent(&sys.g_act(r, &sys.module_act(&x, &b)?)?);
        let rhs = sys.lambda(r).conjugate(&sys.represent(&x)).matmul(&sys.pi(&alpha_r_b));
        worst = worst.max(lhs.max_abs_diff(&rhs));

        let (p, q) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let m = WindowedMatrix::matrix_unit(window.clone(), p, q, a);
        let lhs = sys.g_act_window(r, &sys.module_act_window(&m, &b)?)?.to_matrix();
        let rhs = sys
            .window_translation(r, window)?
            .conjugate(&m.to_matrix())
            .matmul(&sys.window_pi(window, &alpha_r_b)?);
        worst = worst.max(lhs.max_abs_diff(&rhs));
    }
    Ok(CheckResult::residual(
        "compatibility",
        worst,
        sys.tolerances().identity_tol,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebras::{build_action, diagonal, ActionDescriptor};
    use crate::groups::GroupTuple;
    use std::collections::BTreeMap;

    pub(crate) fn z2_swap() -> CrossedSystem {
        let g = FiniteGroup::cyclic(2).unwrap();
        let a = diagonal(2).unwrap();
        let tols = ToleranceConfig::default();
        let desc = ActionDescriptor::Permutation {
            maps: BTreeMap::from([("1".to_string(), vec![1, 0])]),
        };
        let alpha = build_action(&g, &a, &desc, &tols).unwrap();
        CrossedSystem::new(a, g, alpha, tols).unwrap()
    }

    fn d(x: f64, y: f64) -> ComplexMatrix {
        ComplexMatrix::real_diag(&[x, y])
    }

    #[test]
    fn represent_z2_example() {
        let sys = z2_swap();
        let x = sys.monomial(d(1.0, 2.0), 0);
        assert_eq!(sys.represent(&x), ComplexMatrix::real_diag(&[1.0, 2.0, 2.0, 1.0]));
        let g = sys.monomial(ComplexMatrix::identity(2), 1);
        let swap = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(sys.represent(&g), kron(&ComplexMatrix::identity(2), &swap));
        assert_eq!(sys.represent(&sys.one()), ComplexMatrix::identity(4));
    }

    #[test]
    fn trivial_group_is_inclusion() {
        let g = FiniteGroup::cyclic(1).unwrap();
        let a = crate::algebras::full_matrix(2).unwrap();
        let alpha = GroupAction::trivial(&g, 2);
        let sys = CrossedSystem::new(a, g, alpha, ToleranceConfig::default()).unwrap();
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(sys.represent(&sys.monomial(m.clone(), 0)), m);
    }

    #[test]
    fn represent_is_a_star_homomorphism() {
        let sys = z2_swap();
        let mut rng = seeded(3);
        for _ in 0..200 {
            let x = sys.random_element(&mut rng);
            let y = sys.random_element(&mut rng);
            let prod = sys.represent(&sys.mul(&x, &y));
            assert!(prod.max_abs_diff(&sys.represent(&x).matmul(&sys.represent(&y))) < 1e-12);
            let adj = sys.represent(&sys.adjoint(&x));
            assert!(adj.max_abs_diff(&sys.represent(&x).adjoint()) < 1e-12);
        }
    }

    #[test]
    fn decompose_inverts_represent() {
        let sys = z2_swap();
        let mut rng = seeded(9);
        let x = sys.random_element(&mut rng);
        let back = sys.decompose(&sys.represent(&x)).unwrap();
        assert!(back.max_abs_diff(&x) < 1e-14);
        assert!(sys.decompose(&ComplexMatrix::unit(4, 0, 1)).is_err());
    }

    #[test]
    fn expectation_examples() {
        let sys = z2_swap();
        let a = d(1.0, 5.0);
        let b = d(-2.0, 3.0);
        let x = sys.monomial(a.clone(), 0).add(&sys.monomial(b, 1));
        assert_eq!(sys.expectation(&x), a);
        let g = sys.monomial(ComplexMatrix::identity(2), 1);
        assert_eq!(sys.expectation(&g), ComplexMatrix::zeros(2, 2));
    }

    #[test]
    fn expectation_is_bimodular_and_contractive() {
        let sys = z2_swap();
        let mut rng = seeded(5);
        for _ in 0..100 {
            let x = sys.random_element(&mut rng);
            let a = sys.random_algebra_element(&mut rng);
            let b = sys.random_algebra_element(&mut rng);
            let axb = sys.mul(&sys.mul(&sys.monomial(a.clone(), 0), &x), &sys.monomial(b.clone(), 0));
            let lhs = sys.expectation(&axb);
            let rhs = a.matmul(&sys.expectation(&x)).matmul(&b);
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
            assert!(norm(&sys.expectation(&x)) <= sys.norm(&x) + 1e-12);
        }
    }

    #[test]
    fn module_action_examples() {
        let sys = z2_swap();
        let x = sys.monomial(d(1.0, 2.0), 1);
        let y = sys.module_act(&x, &d(3.0, 4.0)).unwrap();
        assert_eq!(y, sys.monomial(d(4.0, 6.0), 1));
        assert_eq!(sys.module_act(&x, &ComplexMatrix::identity(2)).unwrap(), x);
        assert!(sys.module_act(&x, &ComplexMatrix::unit(2, 0, 1)).is_err());
    }

    #[test]
    fn module_action_matches_representation_and_is_associative() {
        let sys = z2_swap();
        let mut rng = seeded(11);
        for _ in 0..200 {
            let x = sys.random_element(&mut rng);
            let b = sys.random_algebra_element(&mut rng);
            let c = sys.random_algebra_element(&mut rng);
            let xb = sys.module_act(&x, &b).unwrap();
            let concrete = sys.represent(&x).matmul(&sys.pi(&b));
            assert!(sys.represent(&xb).max_abs_diff(&concrete) < 1e-12);
            let left = sys.module_act(&xb, &c).unwrap();
            let right = sys.module_act(&x, &b.matmul(&c)).unwrap();
            assert!(left.max_abs_diff(&right) < 1e-12);
        }
    }

    #[test]
    fn window_module_action() {
        let sys = z2_swap();
        let w = Window::group(sys.group());
        let a = d(2.0, 7.0);
        let b = d(3.0, 4.0);
        let m = WindowedMatrix::matrix_unit(w.clone(), 1, 1, a.clone());
        let out = sys.module_act_window(&m, &b).unwrap();
        assert_eq!(out.entry(1, 1), &a.matmul(&sys.alpha(1, &b)));
        let one = sys.module_act_window(&m, &ComplexMatrix::identity(2)).unwrap();
        assert_eq!(one, m);

        let mut rng = seeded(12);
        let mixed = Window::new(vec![
            GroupTuple::singleton(0),
            GroupTuple::new(vec![1, 1]).unwrap(),
            GroupTuple::new(vec![0, 1]).unwrap(),
        ])
        .unwrap();
        for _ in 0..200 {
            let blocks = (0..9).map(|_| sys.random_algebra_element(&mut rng)).collect();
            let m = WindowedMatrix::new(mixed.clone(), blocks).unwrap();
            let b = sys.random_algebra_element(&mut rng);
            let lhs = sys.module_act_window(&m, &b).unwrap().to_matrix();
            let rhs = m.to_matrix().matmul(&sys.window_pi(&mixed, &b).unwrap());
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }

    #[test]
    fn windowed_matrix_round_trip() {
        let mut rng = seeded(1);
        let w = Window::singletons([0, 2, 1]).unwrap();
        let blocks = (0..9).map(|_| crate::random::random_matrix(&mut rng, 2, 2)).collect();
        let m = WindowedMatrix::new(w.clone(), blocks).unwrap();
        let back = WindowedMatrix::from_matrix(w, 2, &m.to_matrix()).unwrap();
        assert_eq!(back, m);
        assert_eq!(m.adjoint().to_matrix(), m.to_matrix().adjoint());
    }

    #[test]
    fn group_action_examples() {
        let sys = z2_swap();
        let a = d(1.0, 9.0);
        let x = sys.monomial(a.clone(), 1);
        assert_eq!(sys.g_act(1, &x).unwrap(), sys.monomial(sys.alpha(1, &a), 1));
        assert_eq!(sys.g_act(0, &x).unwrap(), x);
    }

    #[test]
    fn g_act_matches_lambda_conjugation_and_is_isometric() {
        let g = FiniteGroup::symmetric(3).unwrap();
        let a = diagonal(2).unwrap();
        let tols = ToleranceConfig::default();
        // Sign representation acting by the coordinate swap.
        let maps = g
            .elements()
            .filter(|&s| g.mul(s, s) == g.identity() && s != g.identity())
            .map(|s| (g.label(s).to_string(), vec![1, 0]))
            .collect();
        let alpha = build_action(&g, &a, &ActionDescriptor::Permutation { maps }, &tols).unwrap();
        let sys = CrossedSystem::new(a, g, alpha, tols).unwrap();
        let mut rng = seeded(17);
        for _ in 0..50 {
            let x = sys.random_element(&mut rng);
            let r = rng.gen_range(0..6);
            let moved = sys.represent(&sys.g_act(r, &x).unwrap());
            assert!(moved.max_abs_diff(&sys.lambda(r).conjugate(&sys.represent(&x))) < 1e-12);
            assert!((norm(&moved) - sys.norm(&x)).abs() < 1e-9);
        }
    }

    #[test]
    fn g_act_window_matches_translation_unitary() {
        let sys = z2_swap();
        let w = Window::new(vec![GroupTuple::new(vec![0, 1]).unwrap(), GroupTuple::singleton(0)])
            .unwrap()
            .translation_closure(sys.group())
            .unwrap();
        let mut rng = seeded(23);
        let n = w.len();
        for _ in 0..200 {
            let blocks = (0..n * n).map(|_| sys.random_algebra_element(&mut rng)).collect();
            let m = WindowedMatrix::new(w.clone(), blocks).unwrap();
            let r = rng.gen_range(0..2);
            let lhs = sys.g_act_window(r, &m).unwrap().to_matrix();
            let rhs = sys.window_translation(r, &w).unwrap().conjugate(&m.to_matrix());
            assert!(lhs.max_abs_diff(&rhs) < 1e-14);
        }
        let open = Window::singletons([0]).unwrap();
        let m = WindowedMatrix::zeros(open, 2);
        assert!(matches!(sys.g_act_window(1, &m), Err(Error::WindowNotClosed { .. })));
    }

    #[test]
    fn compatibility_passes_on_valid_systems() {
        let sys = z2_swap();
        let w = Window::group(sys.group());
        let res = check_compatibility(&sys, &w, 500, 1).unwrap();
        assert!(res.pass);
        assert!(res.value <= 1e-12);

        let g = FiniteGroup::cyclic(1).unwrap();
        let a = crate::algebras::full_matrix(1).unwrap();
        let trivial =
            CrossedSystem::new(a, g.clone(), GroupAction::trivial(&g, 1), ToleranceConfig::default()).unwrap();
        let res = check_compatibility(&trivial, &Window::group(&g), 50, 1).unwrap();
        assert_eq!(res.value, 0.0);
    }

    #[test]
    fn corrupted_action_fails_compatibility() {
        let g = FiniteGroup::cyclic(3).unwrap();
        let a = diagonal(3).unwrap();
        let shift = crate::algebras::permutation_unitary(&[1, 2, 0], 3).unwrap();
        let transposition = crate::algebras::permutation_unitary(&[1, 0, 2], 3).unwrap();
        let alpha = GroupAction::from_unitaries_unchecked(vec![ComplexMatrix::identity(3), shift, transposition]);
        let tols = ToleranceConfig::default();
        assert!(CrossedSystem::new(a.clone(), g.clone(), alpha.clone(), tols).is_err());
        let sys = CrossedSystem::new_unchecked(a, g.clone(), alpha, tols).unwrap();
        let res = check_compatibility(&sys, &Window::group(&g), 200, 4).unwrap();
        assert!(!res.pass);
    }

    #[test]
    fn expectation_is_faithful_on_the_coefficient_basis() {
        let sys = z2_swap();
        let basis = sys.crossed_algebra().basis().to_vec();
        for (k, b) in basis.iter().enumerate() {
            let x = sys.decompose(b).unwrap();
            let e = sys.expectation(&sys.mul(&sys.adjoint(&x), &x));
            assert!(norm(&e) > 1e-6, "basis element {k}");
        }
    }
}
