//! Finite groups given by multiplication tables, the tuple calculus on
//! `G^∞ = ⋃ G^n`, finite windows of tuples, and the permutation unitaries
//! `λ_s` on `ℓ²(G)` and `U_r` on `ℓ²(W)`.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ONE};

/// How to build a group. Explicit tables reference elements by label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupDescriptor {
    Cyclic {
        n: usize,
    },
    Dihedral {
        n: usize,
    },
    Symmetric {
        n: usize,
    },
    Table {
        labels: Vec<String>,
        table: Vec<Vec<String>>,
    },
}

#[derive(Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    labels: Vec<String>,
    table: Vec<Vec<usize>>,
    identity: usize,
    inverses: Vec<usize>,
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteGroup")
            .field("order", &self.order())
            .field("labels", &self.labels)
            .finish()
    }
}

pub fn build_group(descriptor: &GroupDescriptor) -> Result<FiniteGroup> {
    match descriptor {
        GroupDescriptor::Cyclic { n } => FiniteGroup::cyclic(*n),
        GroupDescriptor::Dihedral { n } => FiniteGroup::dihedral(*n),
        GroupDescriptor::Symmetric { n } => FiniteGroup::symmetric(*n),
        GroupDescriptor::Table { labels, table } => {
            let index: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
            if index.len() != labels.len() {
                return Err(Error::InvalidGroup("duplicate element labels".into()));
            }
            let mut rows = Vec::with_capacity(table.len());
            for row in table {
                let mut out = Vec::with_capacity(row.len());
                for entry in row {
                    let &k = index
                        .get(entry.as_str())
                        .ok_or_else(|| Error::InvalidGroup(format!("table entry {entry:?} is not a label")))?;
                    out.push(k);
                }
                rows.push(out);
            }
            FiniteGroup::from_table(labels.clone(), rows)
        }
    }
}

impl FiniteGroup {
    /// Validates a multiplication table: Latin square, two-sided identity,
    /// associativity on all triples.
    pub fn from_table(labels: Vec<String>, table: Vec<Vec<usize>>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidGroup("empty group".into()));
        }
        if table.len() != n || table.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidGroup(format!("table must be {n}x{n}")));
        }
        if table.iter().flatten().any(|&k| k >= n) {
            return Err(Error::InvalidGroup("table entry out of range".into()));
        }
        for i in 0..n {
            let row: HashSet<usize> = table[i].iter().copied().collect();
            let col: HashSet<usize> = (0..n).map(|j| table[j][i]).collect();
            if row.len() != n || col.len() != n {
                return Err(Error::InvalidGroup(format!(
                    "not a Latin square at row/column {:?}",
                    labels[i]
                )));
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
            .ok_or_else(|| Error::InvalidGroup("no identity element".into()))?;
        for a in 0..n {
            for b in 0..n {
                let ab = table[a][b];
                for c in 0..n {
                    if table[ab][c] != table[a][table[b][c]] {
                        return Err(Error::InvalidGroup(format!(
                            "not associative on ({}, {}, {})",
                            labels[a], labels[b], labels[c]
                        )));
                    }
                }
            }
        }
        let inverses = (0..n)
            .map(|a| {
                (0..n)
                    .find(|&b| table[a][b] == identity)
                    .expect("Latin square row contains the identity")
            })
            .collect();
        Ok(Self {
            labels,
            table,
            identity,
            inverses,
        })
    }

    /// `Z/n` with labels `"0" .. "n-1"` and addition mod n.
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGroup("cyclic group of order 0".into()));
        }
        let labels = (0..n).map(|k| k.to_string()).collect();
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::from_table(labels, table)
    }

    /// Dihedral group of order `2n`. Index `k` is the rotation `r^k` (label
    /// `"r{k}"`), index `n + k` is `r^k s` (label `"r{k}s"`).
    pub fn dihedral(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGroup("dihedral group needs n >= 1".into()));
        }
        let decode = |x: usize| (x % n, x / n);
        let mut labels: Vec<String> = (0..n).map(|k| format!("r{k}")).collect();
        labels.extend((0..n).map(|k| format!("r{k}s")));
        let table = (0..2 * n)
            .map(|x| {
                (0..2 * n)
                    .map(|y| {
                        let ((a, i), (b, j)) = (decode(x), decode(y));
                        // s r^b = r^{-b} s
                        let rot = if i == 0 { (a + b) % n } else { (a + n - b) % n };
                        rot + n * ((i + j) % 2)
                    })
                    .collect()
            })
            .collect();
        Self::from_table(labels, table)
    }

    /// Symmetric group on `n <= 4` points, permutations in lexicographic order
    /// of their one-line notation (which is also the label). The product is
    /// composition: `(σ τ)(x) = σ(τ(x))`.
    pub fn symmetric(n: usize) -> Result<Self> {
        if n == 0 || n > 4 {
            return Err(Error::InvalidGroup(format!(
                "symmetric groups are limited to 1 <= n <= 4, got {n}"
            )));
        }
        let perms = permutations(n);
        let index: HashMap<Vec<usize>, usize> = perms.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        let labels = perms
            .iter()
            .map(|p| p.iter().map(|d| d.to_string()).collect::<String>())
            .collect();
        let table = perms
            .iter()
            .map(|s| {
                perms
                    .iter()
                    .map(|t| {
                        let comp: Vec<usize> = (0..n).map(|x| s[t[x]]).collect();
                        index[&comp]
                    })
                    .collect()
            })
            .collect();
        Self::from_table(labels, table)
    }

    pub fn order(&self) -> usize {
        self.labels.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, x: usize) -> &str {
        &self.labels[x]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::InvalidElement(format!("no element labelled {label:?}")))
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order()
    }

    pub fn check(&self, x: usize) -> Result<usize> {
        if x < self.order() {
            Ok(x)
        } else {
            Err(Error::InvalidElement(format!(
                "index {x} out of range for a group of order {}",
                self.order()
            )))
        }
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverses[a]
    }

    /// `a b a⁻¹`.
    pub fn conj(&self, a: usize, b: usize) -> usize {
        self.mul(self.mul(a, b), self.inv(a))
    }

    pub fn is_abelian(&self) -> bool {
        self.elements()
            .all(|a| self.elements().all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Left-to-right product `t₁ t₂ ⋯ t_ℓ`.
    pub fn tuple_bar(&self, t: &GroupTuple) -> Result<usize> {
        let mut acc = self.identity;
        for &x in t.components() {
            acc = self.mul(acc, self.check(x)?);
        }
        Ok(acc)
    }

    /// `(t_ℓ⁻¹, …, t₁⁻¹)`.
    pub fn tuple_inverse(&self, t: &GroupTuple) -> Result<GroupTuple> {
        let comps = t
            .components()
            .iter()
            .rev()
            .map(|&x| self.check(x).map(|x| self.inv(x)))
            .collect::<Result<Vec<_>>>()?;
        GroupTuple::new(comps)
    }

    /// `r t = (r t₁, t₂, …, t_ℓ)`.
    pub fn left_translate(&self, r: usize, t: &GroupTuple) -> Result<GroupTuple> {
        self.check(r)?;
        let mut comps = t.components().to_vec();
        for &x in &comps {
            self.check(x)?;
        }
        comps[0] = self.mul(r, comps[0]);
        GroupTuple::new(comps)
    }

    /// Left regular representation: the permutation matrix `δ_u ↦ δ_{su}`.
    pub fn regular_unitary(&self, s: usize) -> Result<ComplexMatrix> {
        self.check(s)?;
        let n = self.order();
        let mut m = ComplexMatrix::zeros(n, n);
        for u in 0..n {
            m[(self.mul(s, u), u)] = ONE;
        }
        Ok(m)
    }

    /// `U_r` on `ℓ²(W)`: the permutation matrix `δ_t ↦ δ_{rt}`. The window must
    /// be closed under left translation by `r`.
    pub fn translation_unitary(&self, r: usize, window: &Window) -> Result<ComplexMatrix> {
        let perm = window.translation_permutation(self, r)?;
        let n = window.len();
        let mut m = ComplexMatrix::zeros(n, n);
        for (from, &to) in perm.iter().enumerate() {
            m[(to, from)] = ONE;
        }
        Ok(m)
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for x in 0..used.len() {
            if !used[x] {
                used[x] = true;
                prefix.push(x);
                rec(prefix, used, out);
                prefix.pop();
                used[x] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// An element of `G^ℓ ⊂ G^∞` for some `ℓ ≥ 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct GroupTuple(Vec<usize>);

impl GroupTuple {
    pub fn new(components: Vec<usize>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidInput("group tuples have length >= 1".into()));
        }
        Ok(Self(components))
    }

    pub fn singleton(x: usize) -> Self {
        Self(vec![x])
    }

    pub fn components(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_singleton(&self) -> Option<usize> {
        match self.0.as_slice() {
            [x] => Some(*x),
            _ => None,
        }
    }
}

impl TryFrom<Vec<usize>> for GroupTuple {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<GroupTuple> for Vec<usize> {
    fn from(t: GroupTuple) -> Self {
        t.0
    }
}

/// Ordered finite set of distinct tuples; basis order of `ℓ²(W)` is the
/// construction order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    tuples: Vec<GroupTuple>,
    positions: HashMap<GroupTuple, usize>,
}

impl Window {
    pub fn new(tuples: Vec<GroupTuple>) -> Result<Self> {
        if tuples.is_empty() {
            return Err(Error::InvalidInput("window must be nonempty".into()));
        }
        let mut positions = HashMap::with_capacity(tuples.len());
        for (i, t) in tuples.iter().enumerate() {
            if positions.insert(t.clone(), i).is_some() {
                return Err(Error::InvalidInput(format!(
                    "duplicate tuple {:?} in window",
                    t.components()
                )));
            }
        }
        Ok(Self { tuples, positions })
    }

    /// Singleton tuples over the given elements, in the given order.
    pub fn singletons(elements: impl IntoIterator<Item = usize>) -> Result<Self> {
        Self::new(elements.into_iter().map(GroupTuple::singleton).collect())
    }

    /// All singletons `(s)`, `s ∈ G`, in element order: the copy of `ℓ²(G)`
    /// inside `ℓ²(G^∞)`.
    pub fn group(group: &FiniteGroup) -> Self {
        Self::singletons(group.elements()).expect("groups are nonempty")
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn tuples(&self) -> &[GroupTuple] {
        &self.tuples
    }

    pub fn tuple(&self, i: usize) -> &GroupTuple {
        &self.tuples[i]
    }

    pub fn position(&self, t: &GroupTuple) -> Option<usize> {
        self.positions.get(t).copied()
    }

    pub fn contains(&self, t: &GroupTuple) -> bool {
        self.positions.contains_key(t)
    }

    /// `bar` of every tuple, in window order.
    pub fn bars(&self, group: &FiniteGroup) -> Result<Vec<usize>> {
        self.tuples.iter().map(|t| group.tuple_bar(t)).collect()
    }

    /// `perm[i]` is the position of `r · tuple(i)`.
    pub fn translation_permutation(&self, group: &FiniteGroup, r: usize) -> Result<Vec<usize>> {
        group.check(r)?;
        self.tuples
            .iter()
            .map(|t| {
                let moved = group.left_translate(r, t)?;
                self.position(&moved).ok_or(Error::WindowNotClosed { element: r })
            })
            .collect()
    }

    pub fn is_closed_under(&self, group: &FiniteGroup, r: usize) -> bool {
        self.translation_permutation(group, r).is_ok()
    }

    /// `rW`, with the order induced from `W`.
    pub fn translate(&self, group: &FiniteGroup, r: usize) -> Result<Self> {
        let tuples = self
            .tuples
            .iter()
            .map(|t| group.left_translate(r, t))
            .collect::<Result<Vec<_>>>()?;
        Self::new(tuples)
    }

    /// Smallest window containing `self` and closed under every left
    /// translation; `self`'s tuples come first.
    pub fn translation_closure(&self, group: &FiniteGroup) -> Result<Self> {
        let mut tuples = self.tuples.clone();
        let mut seen: HashSet<GroupTuple> = tuples.iter().cloned().collect();
        let mut i = 0;
        while i < tuples.len() {
            for r in group.elements() {
                let moved = group.left_translate(r, &tuples[i])?;
                if seen.insert(moved.clone()) {
                    tuples.push(moved);
                }
            }
            i += 1;
        }
        Self::new(tuples)
    }

    /// Whether every tuple in `self` appears in `other`.
    pub fn is_subwindow_of(&self, other: &Window) -> bool {
        self.tuples.iter().all(|t| other.contains(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::seeded;
    use rand::Rng;

    fn labels(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn cyclic_three_table() {
        let g = build_group(&GroupDescriptor::Cyclic { n: 3 }).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(g.mul(a, b), (a + b) % 3);
            }
        }
        assert_eq!(g.identity(), 0);
        assert_eq!(g.inv(1), 2);
    }

    #[test]
    fn explicit_tables() {
        let ok = GroupDescriptor::Table {
            labels: labels(&["e", "g"]),
            table: vec![labels(&["e", "g"]), labels(&["g", "e"])],
        };
        let g = build_group(&ok).unwrap();
        assert_eq!(g.order(), 2);
        assert_eq!(g.identity(), 0);
        assert_eq!(g.inv(1), 1);

        let bad = GroupDescriptor::Table {
            labels: labels(&["e", "g"]),
            table: vec![labels(&["e", "e"]), labels(&["g", "e"])],
        };
        assert!(matches!(build_group(&bad), Err(Error::InvalidGroup(_))));
    }

    #[test]
    fn non_associative_latin_square_is_rejected() {
        // A Latin square with identity 0 that is not a group (order 5 loop).
        let table = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        let labels = (0..5).map(|i| i.to_string()).collect();
        let err = FiniteGroup::from_table(labels, table).unwrap_err();
        assert!(matches!(err, Error::InvalidGroup(m) if m.contains("associative")));
    }

    #[test]
    fn standard_families_have_expected_orders() {
        assert_eq!(FiniteGroup::dihedral(4).unwrap().order(), 8);
        assert_eq!(FiniteGroup::symmetric(3).unwrap().order(), 6);
        assert_eq!(FiniteGroup::symmetric(4).unwrap().order(), 24);
        assert!(!FiniteGroup::symmetric(3).unwrap().is_abelian());
        assert!(!FiniteGroup::dihedral(3).unwrap().is_abelian());
        assert!(FiniteGroup::symmetric(5).is_err());
    }

    #[test]
    fn tuple_bar_examples() {
        let g = FiniteGroup::cyclic(3).unwrap();
        assert_eq!(g.tuple_bar(&GroupTuple::new(vec![1, 2]).unwrap()).unwrap(), 0);
        let s3 = FiniteGroup::symmetric(3).unwrap();
        let e = s3.identity();
        assert_eq!(s3.tuple_bar(&GroupTuple::new(vec![e, e, e]).unwrap()).unwrap(), e);
        assert!(matches!(
            g.tuple_bar(&GroupTuple::new(vec![5]).unwrap()),
            Err(Error::InvalidElement(_))
        ));
    }

    #[test]
    fn tuple_inverse_and_translation_examples() {
        let g = FiniteGroup::cyclic(3).unwrap();
        let t = GroupTuple::new(vec![1, 2]).unwrap();
        assert_eq!(g.tuple_inverse(&t).unwrap().components(), &[1, 2]);
        assert_eq!(
            g.left_translate(2, &GroupTuple::singleton(2)).unwrap(),
            GroupTuple::singleton(1)
        );
        assert!(GroupTuple::new(vec![]).is_err());
    }

    #[test]
    fn bar_calculus_identities_on_random_tuples() {
        let g = FiniteGroup::symmetric(4).unwrap();
        let mut rng = seeded(17);
        for _ in 0..500 {
            let len = rng.gen_range(1..6);
            let t = GroupTuple::new((0..len).map(|_| rng.gen_range(0..24)).collect()).unwrap();
            let r = rng.gen_range(0..24);
            let bar = g.tuple_bar(&t).unwrap();
            let inv = g.tuple_inverse(&t).unwrap();
            assert_eq!(g.tuple_bar(&inv).unwrap(), g.inv(bar));
            assert_eq!(g.tuple_inverse(&inv).unwrap(), t);
            let rt = g.left_translate(r, &t).unwrap();
            assert_eq!(g.tuple_bar(&rt).unwrap(), g.mul(r, bar));
            assert_eq!(g.left_translate(g.identity(), &t).unwrap(), t);
        }
    }

    #[test]
    fn regular_unitaries() {
        let z2 = FiniteGroup::cyclic(2).unwrap();
        let swap = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(z2.regular_unitary(1).unwrap(), swap);
        assert_eq!(z2.regular_unitary(0).unwrap(), ComplexMatrix::identity(2));

        let s3 = FiniteGroup::symmetric(3).unwrap();
        for s in s3.elements() {
            for t in s3.elements() {
                let lhs = s3.regular_unitary(s).unwrap().matmul(&s3.regular_unitary(t).unwrap());
                assert_eq!(lhs, s3.regular_unitary(s3.mul(s, t)).unwrap());
            }
            let prod = s3
                .regular_unitary(s)
                .unwrap()
                .matmul(&s3.regular_unitary(s3.inv(s)).unwrap());
            assert_eq!(prod, ComplexMatrix::identity(6));
        }
    }

    #[test]
    fn translation_unitaries() {
        let z2 = FiniteGroup::cyclic(2).unwrap();
        let w = Window::group(&z2);
        let swap = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(z2.translation_unitary(1, &w).unwrap(), swap);

        let odd = Window::new(vec![GroupTuple::new(vec![1, 1]).unwrap(), GroupTuple::singleton(0)]).unwrap();
        assert_eq!(z2.translation_unitary(0, &odd).unwrap(), ComplexMatrix::identity(2));
        assert!(matches!(
            z2.translation_unitary(1, &odd),
            Err(Error::WindowNotClosed { element: 1 })
        ));
    }

    #[test]
    fn translation_unitaries_compose_on_closed_windows() {
        let g = FiniteGroup::dihedral(3).unwrap();
        let seed_window = Window::new(vec![GroupTuple::new(vec![1, 4]).unwrap(), GroupTuple::singleton(2)]).unwrap();
        let w = seed_window.translation_closure(&g).unwrap();
        for r in g.elements() {
            for r2 in g.elements() {
                let lhs = g
                    .translation_unitary(r, &w)
                    .unwrap()
                    .matmul(&g.translation_unitary(r2, &w).unwrap());
                assert_eq!(lhs, g.translation_unitary(g.mul(r, r2), &w).unwrap());
            }
        }
    }

    #[test]
    fn conjugation_by_translation_permutes_matrix_units() {
        let g = FiniteGroup::symmetric(3).unwrap();
        let w = Window::new(vec![GroupTuple::new(vec![1, 2]).unwrap()])
            .unwrap()
            .translation_closure(&g)
            .unwrap();
        let n = w.len();
        for r in g.elements() {
            let u = g.translation_unitary(r, &w).unwrap();
            for i in 0..n {
                for j in 0..n {
                    let moved = u.conjugate(&ComplexMatrix::unit(n, i, j));
                    let ri = w.position(&g.left_translate(r, w.tuple(i)).unwrap()).unwrap();
                    let rj = w.position(&g.left_translate(r, w.tuple(j)).unwrap()).unwrap();
                    assert_eq!(moved, ComplexMatrix::unit(n, ri, rj));
                }
            }
        }
    }

    #[test]
    fn windows_reject_duplicates() {
        let t = GroupTuple::singleton(0);
        assert!(Window::new(vec![t.clone(), t]).is_err());
    }
}
