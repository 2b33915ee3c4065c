//! `C*_r(G)` as a concrete algebra, the coactions `δ` on `A ⋊_r G`, `δ_F` on
//! windowed matrix algebras and `δ_A` on `A`, and the comodule and comap
//! identity checks.
//!
//! Tensor products with `C*_r(G)` always put the group leg last:
//! `x ⊗ λ_g` is `kron(x, λ_g)`.

use std::sync::Arc;

use rand::Rng;

use crate::algebras::StarAlgebra;
use crate::check::CheckResult;
use crate::cpmaps::{group_components, Coaction, LinearMapOp, OperatorModule};
use crate::crossed::{CrossedElement, CrossedSystem, WindowedMatrix};
use crate::error::{Error, Result};
use crate::groups::{FiniteGroup, Window};
use crate::linalg::{kron, ComplexMatrix};
use crate::random::seeded;

/// `C*_r(G) = span{λ_s}` inside `M_{|G|}`.
#[derive(Debug, Clone)]
pub struct GroupAlgebra {
    lambdas: Vec<ComplexMatrix>,
    algebra: StarAlgebra,
}

impl GroupAlgebra {
    pub fn new(group: &FiniteGroup) -> Result<Self> {
        let lambdas = group
            .elements()
            .map(|s| group.regular_unitary(s))
            .collect::<Result<Vec<_>>>()?;
        let n = group.order();
        let algebra = StarAlgebra::from_basis_unchecked(n, lambdas.clone(), Some(ComplexMatrix::identity(n)))?;
        Ok(Self { lambdas, algebra })
    }

    pub fn lambda(&self, s: usize) -> &ComplexMatrix {
        &self.lambdas[s]
    }

    pub fn lambdas(&self) -> &[ComplexMatrix] {
        &self.lambdas
    }

    pub fn algebra(&self) -> &StarAlgebra {
        &self.algebra
    }

    /// `max |λ_s λ_t − λ_{st}|`.
    pub fn multiplication_residual(&self, group: &FiniteGroup) -> f64 {
        let mut worst: f64 = 0.0;
        for s in group.elements() {
            for t in group.elements() {
                let prod = self.lambdas[s].matmul(&self.lambdas[t]);
                worst = worst.max(prod.max_abs_diff(&self.lambdas[group.mul(s, t)]));
            }
        }
        worst
    }
}

fn regular(sys: &CrossedSystem, s: usize) -> ComplexMatrix {
    sys.group().regular_unitary(s).expect("valid group element")
}

/// `δ(Σ a_s s) = Σ (a_s s) ⊗ λ_s`.
pub fn delta(sys: &CrossedSystem, x: &CrossedElement) -> ComplexMatrix {
    let n = sys.ambient_dim() * sys.group().order();
    let mut out = ComplexMatrix::zeros(n, n);
    for (s, a) in x.coeffs().iter().enumerate() {
        if a.max_abs() == 0.0 {
            continue;
        }
        let term = sys.represent(&sys.monomial(a.clone(), s));
        out += &kron(&term, &regular(sys, s));
    }
    out
}

/// `δ_A(a) = a ⊗ λ_e`.
pub fn delta_algebra(sys: &CrossedSystem, a: &ComplexMatrix) -> ComplexMatrix {
    kron(a, &ComplexMatrix::identity(sys.group().order()))
}

/// `δ_F(a ⊗ e_{s,t}) = (a ⊗ λ_{bar(s) bar(t)⁻¹}) ⊗ e_{s,t}`, an element of
/// `M_W(A ⊗ C*_r(G))`.
pub fn delta_window(sys: &CrossedSystem, m: &WindowedMatrix) -> Result<WindowedMatrix> {
    let g = sys.group();
    let w = m.window();
    let bars = w.bars(g)?;
    let n = w.len();
    let blocks = m
        .entries()
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let (p, q) = (k / n, k % n);
            kron(a, &regular(sys, g.mul(bars[p], g.inv(bars[q]))))
        })
        .collect();
    WindowedMatrix::new(w.clone(), blocks)
}

/// The canonical identification `M_W(A ⊗ C*_r(G)) ≅ M_W(A) ⊗ C*_r(G)`: an
/// index permutation moving the group leg last.
pub fn identification(m: &WindowedMatrix, group_order: usize) -> ComplexMatrix {
    let w = m.window().len();
    let g = group_order;
    let d = m.entry_dim() / g;
    let source = m.to_matrix();
    let size = d * g * w;
    // Source index ((i g + u) w + p); target index ((i w + p) g + u).
    let position = |i: usize, u: usize, p: usize| (i * w + p) * g + u;
    let mut out = ComplexMatrix::zeros(size, size);
    for i in 0..d {
        for u in 0..g {
            for p in 0..w {
                let row_src = (i * g + u) * w + p;
                let row_dst = position(i, u, p);
                for j in 0..d {
                    for v in 0..g {
                        for q in 0..w {
                            out[(row_dst, position(j, v, q))] = source[(row_src, (j * g + v) * w + q)];
                        }
                    }
                }
            }
        }
    }
    out
}

/// `δ_F` on concrete matrices in `M_W(A)`, landing in `M_W(A) ⊗ C*_r(G)`.
pub fn delta_window_matrix(sys: &CrossedSystem, window: &Window, m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let wm = WindowedMatrix::from_matrix(window.clone(), sys.dim(), m)?;
    Ok(identification(&delta_window(sys, &wm)?, sys.group().order()))
}

/// `(π ⊗ id)(Σ_g b_g ⊗ λ_g)`, through `π` or a window `π_W`.
fn amplified_right_action(
    parts: &[ComplexMatrix],
    lambdas: &[ComplexMatrix],
    pi: impl Fn(&ComplexMatrix) -> Result<ComplexMatrix>,
) -> Result<ComplexMatrix> {
    let mut out: Option<ComplexMatrix> = None;
    for (b, l) in parts.iter().zip(lambdas) {
        let term = kron(&pi(b)?, l);
        out = Some(match out {
            Some(acc) => &acc + &term,
            None => term,
        });
    }
    out.ok_or_else(|| Error::InvalidInput("empty group".into()))
}

/// Checks `δ(x·b) = δ(x)·δ_A(b)` and `δ_F(m·b) = δ_F(m)·δ_A(b)` on random
/// inputs, with `δ_A` the standard restricted coaction.
pub fn check_comodule(sys: &CrossedSystem, window: &Window, trials: usize, seed: u64) -> Result<CheckResult> {
    let sys_a = sys.clone();
    check_comodule_with(sys, window, trials, seed, &move |b| delta_algebra(&sys_a, b))
}

/// [`check_comodule`] with a caller-supplied `δ_A` (for negative controls).
/// Left sides go through the coefficient formulas; right sides multiply the
/// coacted element by `(π ⊗ id)(δ_A(b))`.
pub fn check_comodule_with(
    sys: &CrossedSystem,
    window: &Window,
    trials: usize,
    seed: u64,
    delta_a: &dyn Fn(&ComplexMatrix) -> ComplexMatrix,
) -> Result<CheckResult> {
    let g = sys.group();
    let lambdas: Vec<ComplexMatrix> = g.elements().map(|s| regular(sys, s)).collect();
    let mut rng = seeded(seed);
    let w = window.len();
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let s = rng.gen_range(0..g.order());
        let a = sys.random_algebra_element(&mut rng);
        let b = sys.random_algebra_element(&mut rng);
        let parts = group_components(&delta_a(&b), &lambdas);

        let x = sys.monomial(a.clone(), s);
        let lhs = delta(sys, &sys.module_act(&x, &b)?);
        let rhs = delta(sys, &x).matmul(&amplified_right_action(&parts, &lambdas, |c| Ok(sys.pi(c)))?);
        worst = worst.max(lhs.max_abs_diff(&rhs));

        let (p, q) = (rng.gen_range(0..w), rng.gen_range(0..w));
        let m = WindowedMatrix::matrix_unit(window.clone(), p, q, a);
        let lhs = identification(&delta_window(sys, &sys.module_act_window(&m, &b)?)?, g.order());
        let rhs = identification(&delta_window(sys, &m)?, g.order()).matmul(&amplified_right_action(
            &parts,
            &lambdas,
            |c| sys.window_pi(window, c),
        )?);
        worst = worst.max(lhs.max_abs_diff(&rhs));
    }
    Ok(CheckResult::residual("comodule", worst, sys.tolerances().identity_tol))
}

/// Checks `(φ_F ⊗ id)δ = δ_F φ_F` on the crossed-product basis and
/// `(ψ_F ⊗ id)δ_F = δ ψ_F` on the basis of the domain of `ψ_F`. `window` is
/// the ambient window containing the range of `φ_F`.
pub fn check_comap_pair(
    sys: &CrossedSystem,
    phi_f: &LinearMapOp,
    psi_f: &LinearMapOp,
    window: &Window,
) -> Result<CheckResult> {
    let lambdas: Vec<ComplexMatrix> = sys.group().elements().map(|s| regular(sys, s)).collect();
    let mut worst_phi: f64 = 0.0;
    for (b, image) in phi_f.domain().basis().iter().zip(phi_f.images()) {
        let x = sys.decompose(b)?;
        let lhs = phi_f.tensor_id_group(&delta(sys, &x), &lambdas);
        let rhs = delta_window_matrix(sys, window, image)?;
        worst_phi = worst_phi.max(lhs.max_abs_diff(&rhs));
    }
    let mut worst_psi: f64 = 0.0;
    for (m, image) in psi_f.domain().basis().iter().zip(psi_f.images()) {
        let lhs = psi_f.tensor_id_group(&delta_window_matrix(sys, window, m)?, &lambdas);
        let rhs = delta(sys, &sys.decompose(image)?);
        worst_psi = worst_psi.max(lhs.max_abs_diff(&rhs));
    }
    let tol = sys.tolerances().identity_tol;
    Ok(CheckResult::all_of(
        "comap-pair",
        &[
            CheckResult::residual("comap-pair/phi", worst_phi, tol),
            CheckResult::residual("comap-pair/psi", worst_psi, tol),
        ],
    ))
}

fn lambdas_of(sys: &CrossedSystem) -> Vec<ComplexMatrix> {
    sys.group().elements().map(|s| regular(sys, s)).collect()
}

/// `A ⋊_r G` with its right `A`-action, `G`-action by `λ`-conjugation, and `δ`.
pub fn crossed_module(sys: &CrossedSystem) -> OperatorModule {
    let shared = Arc::new(sys.clone());
    let coaction = Coaction::new(lambdas_of(sys), move |m| delta(&shared, &shared.coefficients(m)));
    OperatorModule::new("crossed", sys.crossed_algebra().clone())
        .with_right_action(sys.algebra().basis().iter().map(|b| sys.pi(b)).collect())
        .with_g_action(sys.group().elements().map(|r| sys.lambda(r).clone()).collect())
        .with_coaction(coaction)
}

/// `A` with right multiplication, the action `α`, and `δ_A`.
pub fn algebra_module(sys: &CrossedSystem) -> OperatorModule {
    let shared = Arc::new(sys.clone());
    let coaction = Coaction::new(lambdas_of(sys), move |a| delta_algebra(&shared, a));
    OperatorModule::new("algebra", sys.algebra().clone())
        .with_right_action(sys.algebra().basis().to_vec())
        .with_g_action(sys.action().unitaries().to_vec())
        .with_coaction(coaction)
}

/// `M_W(A)` with the right action through `π_W`, translation by `1 ⊗ U_r`
/// when `W` is closed under every translation, and `δ_F`.
pub fn window_module(sys: &CrossedSystem, window: &Window) -> Result<OperatorModule> {
    let space = sys.window_algebra(window, window)?;
    let right = sys
        .algebra()
        .basis()
        .iter()
        .map(|b| sys.window_pi(window, b))
        .collect::<Result<Vec<_>>>()?;
    let shared = Arc::new(sys.clone());
    let w = window.clone();
    let coaction = Coaction::new(lambdas_of(sys), move |m| {
        delta_window_matrix(&shared, &w, m).expect("window-sized matrix")
    });
    let mut module = OperatorModule::new("window", space)
        .with_right_action(right)
        .with_coaction(coaction);
    let closed = sys.group().elements().all(|r| window.is_closed_under(sys.group(), r));
    if closed {
        module = module.with_g_action(
            sys.group()
                .elements()
                .map(|r| sys.window_translation(r, window))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok(module)
}
