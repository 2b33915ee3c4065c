//! Small standard systems shared by tests, benchmarks and the acceptance run.

use crate::algebras::{build_action, diagonal, full_matrix, ActionDescriptor, GroupAction, StarAlgebra};
use crate::crossed::CrossedSystem;
use crate::error::Result;
use crate::groups::FiniteGroup;
use crate::linalg::ToleranceConfig;

fn swap_action(group: &FiniteGroup, algebra: &StarAlgebra, movers: &[usize]) -> Result<GroupAction> {
    let maps = movers
        .iter()
        .map(|&s| (group.label(s).to_string(), vec![1, 0]))
        .collect();
    build_action(
        group,
        algebra,
        &ActionDescriptor::Permutation { maps },
        &ToleranceConfig::default(),
    )
}

/// `ℤ/2` acting on `diagonal(2)` by swapping the coordinates.
pub fn z2_swap() -> Result<CrossedSystem> {
    let g = FiniteGroup::cyclic(2)?;
    let a = diagonal(2)?;
    let alpha = swap_action(&g, &a, &[1])?;
    CrossedSystem::new(a, g, alpha, ToleranceConfig::default())
}

/// `S₃` acting on `diagonal(2)` through the sign character: odd permutations
/// swap the coordinates.
pub fn s3_sign_swap() -> Result<CrossedSystem> {
    let g = FiniteGroup::symmetric(3)?;
    let a = diagonal(2)?;
    let transpositions: Vec<usize> = g
        .elements()
        .filter(|&s| s != g.identity() && g.mul(s, s) == g.identity())
        .collect();
    let alpha = swap_action(&g, &a, &transpositions)?;
    CrossedSystem::new(a, g, alpha, ToleranceConfig::default())
}

/// `ℂ ⋊ G = C*_r(G)` for the given group.
pub fn scalar(group: FiniteGroup) -> Result<CrossedSystem> {
    let a = diagonal(1)?;
    let alpha = GroupAction::trivial(&group, 1);
    CrossedSystem::new(a, group, alpha, ToleranceConfig::default())
}

/// `ℤ/n` acting on `A` trivially.
pub fn cyclic_trivial(n: usize, algebra: StarAlgebra) -> Result<CrossedSystem> {
    let g = FiniteGroup::cyclic(n)?;
    let alpha = GroupAction::trivial(&g, algebra.ambient_dim());
    CrossedSystem::new(algebra, g, alpha, ToleranceConfig::default())
}

/// `ℤ/2` acting on `M_2` by conjugation with the coordinate swap.
pub fn m2_swap() -> Result<CrossedSystem> {
    let g = FiniteGroup::cyclic(2)?;
    let a = full_matrix(2)?;
    let alpha = swap_action(&g, &a, &[1])?;
    CrossedSystem::new(a, g, alpha, ToleranceConfig::default())
}

/// `ℤ/n` acting on `C(ℤ/n) = diagonal(n)` by translation.
pub fn cyclic_translation(n: usize) -> Result<CrossedSystem> {
    let g = FiniteGroup::cyclic(n)?;
    let a = diagonal(n)?;
    let tols = ToleranceConfig::default();
    let alpha = build_action(&g, &a, &ActionDescriptor::Translation, &tols)?;
    CrossedSystem::new(a, g, alpha, tols)
}
