//! Admissibility certificates: derivation trees recording how a c.p. map (or
//! family of maps) was assembled from the closure rules for admissible and
//! coadmissible maps. Validation rebuilds every map in the tree from bound
//! data, checks each leaf semantically, and certifies complete positivity of
//! every map produced along the way.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{check_equivariance, choi_min_eigenvalue, group_components, EquivarianceMode, LinearMapOp, OperatorModule};
use crate::algebras::is_positive;
use crate::check::CheckResult;
use crate::error::{Error, Result};
use crate::groups::FiniteGroup;
use crate::linalg::{ComplexMatrix, ToleranceConfig, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// Act after the map: `x ↦ α_t(ψ(x))` or `x ↦ (id⊗φ)δ(ψ(x))`.
    Codomain,
    /// Act before the map: `x ↦ ψ_{t·i}(α_t(x))` or `x ↦ ψ_{δ(i)}((id⊗φ)δ(x))`.
    Domain,
}

/// A node of a certificate tree. Every node evaluates to a family of maps;
/// nodes that act on a single map use the child's last member unless
/// `member` selects another one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Certificate {
    /// A bound c.p. module map.
    ModuleMap {
        map: String,
    },
    /// `x ↦ ρ(x) d` with `ρ` a positive functional on the domain and `d ≥ 0`.
    FunctionalTimesPositive {
        functional: String,
        positive: String,
        domain: String,
        codomain: String,
    },
    /// A bound family `{ψ_i}` with `ψ_{t·i}(α_t(b)) = α_t(ψ_i(b))`.
    GFamilyLeaf {
        family: String,
    },
    /// A bound cofamily with `(ψ_{δ(i)}⊗id)δ(b) = δ(ψ_i(b))`.
    GCofamilyLeaf {
        family: String,
    },
    /// `x ↦ ψ(b x b*)`.
    ConjugateDomain {
        element: String,
        #[serde(default)]
        member: Option<usize>,
        child: Box<Certificate>,
    },
    /// `x ↦ d ψ(x) d*`.
    ConjugateCodomain {
        element: String,
        #[serde(default)]
        member: Option<usize>,
        child: Box<Certificate>,
    },
    Sum {
        children: Vec<Certificate>,
    },
    PositiveMultiple {
        factor: f64,
        #[serde(default)]
        member: Option<usize>,
        child: Box<Certificate>,
    },
    /// All composable pairs `ψ_j ∘ φ_i`.
    Compose {
        outer: Box<Certificate>,
        inner: Box<Certificate>,
    },
    /// Translation by a group element (given by label).
    TranslateAction {
        element: String,
        side: Side,
        #[serde(default)]
        member: Option<usize>,
        child: Box<Certificate>,
    },
    /// Slicing the coaction with a functional on `C*_r(G)`.
    TranslateCoaction {
        functional: String,
        side: Side,
        #[serde(default)]
        member: Option<usize>,
        child: Box<Certificate>,
    },
    Union {
        children: Vec<Certificate>,
    },
}

/// A map together with the names of the modules it goes between.
#[derive(Debug, Clone)]
pub struct BoundMap {
    pub map: LinearMapOp,
    pub domain: String,
    pub codomain: String,
}

/// A family `{ψ_i: B_i → D}`; each member's domain algebra is `B_i`, a
/// subspace of the named domain module. A `G`-family carries the index action
/// `index_action[t][i] = t·i`; a cofamily carries `index_map[i] = δ(i)`.
#[derive(Debug, Clone)]
pub struct FamilyBinding {
    pub members: Vec<LinearMapOp>,
    pub domain: String,
    pub codomain: String,
    pub index_action: Option<Vec<Vec<usize>>>,
    pub index_map: Option<Vec<usize>>,
}

/// Everything a certificate may refer to by name.
#[derive(Debug, Clone)]
pub struct CertificateContext {
    pub group: FiniteGroup,
    pub tols: ToleranceConfig,
    pub modules: BTreeMap<String, OperatorModule>,
    pub maps: BTreeMap<String, BoundMap>,
    pub families: BTreeMap<String, FamilyBinding>,
    pub elements: BTreeMap<String, ComplexMatrix>,
    /// Values of functionals on the basis of the module they are used with.
    pub functionals: BTreeMap<String, Vec<C64>>,
    /// Functionals on `C*_r(G)`, given by their values on `λ_s`.
    pub group_functionals: BTreeMap<String, Vec<C64>>,
}

impl CertificateContext {
    pub fn new(group: FiniteGroup, tols: ToleranceConfig) -> Self {
        Self {
            group,
            tols,
            modules: BTreeMap::new(),
            maps: BTreeMap::new(),
            families: BTreeMap::new(),
            elements: BTreeMap::new(),
            functionals: BTreeMap::new(),
            group_functionals: BTreeMap::new(),
        }
    }

    fn module(&self, name: &str) -> Result<&OperatorModule> {
        self.modules
            .get(name)
            .ok_or_else(|| Error::IncompleteCertificate(format!("module {name:?} is not bound")))
    }

    fn element(&self, name: &str) -> Result<&ComplexMatrix> {
        self.elements
            .get(name)
            .ok_or_else(|| Error::IncompleteCertificate(format!("element {name:?} is not bound")))
    }

    fn family(&self, name: &str) -> Result<&FamilyBinding> {
        self.families
            .get(name)
            .ok_or_else(|| Error::IncompleteCertificate(format!("family {name:?} is not bound")))
    }
}

#[derive(Debug, Clone)]
struct Member {
    map: LinearMapOp,
    domain: String,
    codomain: String,
    /// Family name and index for members that come from a family leaf.
    origin: Option<(String, usize)>,
}

struct Validator<'a> {
    ctx: &'a CertificateContext,
    checks: Vec<CheckResult>,
}

/// Validates a certificate against bound data. Fails with
/// `IncompleteCertificate` when the tree names something unbound; otherwise the
/// result passes iff every leaf check, structural check, and complete
/// positivity check in the tree passes.
pub fn validate_certificate(cert: &Certificate, ctx: &CertificateContext) -> Result<CheckResult> {
    let mut v = Validator {
        ctx,
        checks: Vec::new(),
    };
    v.eval(cert, "root")?;
    Ok(CheckResult::all_of("certificate", &v.checks))
}

impl Validator<'_> {
    fn tol(&self) -> f64 {
        self.ctx.tols.identity_tol
    }

    fn structural(&mut self, path: &str, ok: bool, why: &str) -> bool {
        let mut check = CheckResult::residual(format!("{path}/structure"), if ok { 0.0 } else { 1.0 }, 0.0);
        if !ok {
            check = check.with_detail(why.to_string());
        }
        self.checks.push(check);
        ok
    }

    fn certify_cp(&mut self, path: &str, map: &LinearMapOp) {
        let value = choi_min_eigenvalue(map, &self.ctx.tols);
        self.checks.push(CheckResult::lower_bound(
            format!("{path}/cp"),
            value,
            self.ctx.tols.psd_tol,
        ));
    }

    fn pick<'m>(&mut self, path: &str, members: &'m [Member], index: Option<usize>) -> Option<&'m Member> {
        let chosen = match index {
            Some(i) => members.get(i),
            None => members.last(),
        };
        self.structural(path, chosen.is_some(), "no member to act on");
        chosen
    }

    fn eval(&mut self, node: &Certificate, path: &str) -> Result<Vec<Member>> {
        match node {
            Certificate::ModuleMap { map } => {
                let path = format!("{path}/module_map({map})");
                let bound = self
                    .ctx
                    .maps
                    .get(map)
                    .ok_or_else(|| Error::IncompleteCertificate(format!("map {map:?} is not bound")))?;
                let dom = self.ctx.module(&bound.domain)?;
                let cod = self.ctx.module(&bound.codomain)?;
                let mut check = check_equivariance(&bound.map, dom, cod, EquivarianceMode::Module, &self.ctx.tols)?;
                check.name = format!("{path}/module");
                self.checks.push(check);
                self.certify_cp(&path, &bound.map);
                Ok(vec![Member {
                    map: bound.map.clone(),
                    domain: bound.domain.clone(),
                    codomain: bound.codomain.clone(),
                    origin: None,
                }])
            }
            Certificate::FunctionalTimesPositive {
                functional,
                positive,
                domain,
                codomain,
            } => {
                let path = format!("{path}/functional_times_positive({functional},{positive})");
                let values =
                    self.ctx.functionals.get(functional).ok_or_else(|| {
                        Error::IncompleteCertificate(format!("functional {functional:?} is not bound"))
                    })?;
                let d = self.ctx.element(positive)?.clone();
                let dom = self.ctx.module(domain)?.space().clone();
                let cod = self.ctx.module(codomain)?.space().clone();
                if !self.structural(&path, values.len() == dom.dim(), "functional has the wrong length") {
                    return Ok(Vec::new());
                }
                if !self.structural(
                    &path,
                    cod.contains(&d, self.tol()),
                    "positive element is not in the codomain",
                ) {
                    return Ok(Vec::new());
                }
                let rho = |x: &ComplexMatrix| -> C64 { dom.coords(x).iter().zip(values).map(|(c, v)| c * v).sum() };
                let m = dom.dim();
                let gram = ComplexMatrix::from_fn(m, m, |i, j| rho(&dom.basis()[i].adjoint().matmul(&dom.basis()[j])));
                self.checks
                    .push(is_positive(&gram, &self.ctx.tols).renamed(&format!("{path}/functional-positive")));
                self.checks
                    .push(is_positive(&d, &self.ctx.tols).renamed(&format!("{path}/element-positive")));
                let map = LinearMapOp::from_fn(dom.clone(), cod.ambient_dim(), |x| d.scale(rho(x)))?;
                self.certify_cp(&path, &map);
                Ok(vec![Member {
                    map,
                    domain: domain.clone(),
                    codomain: codomain.clone(),
                    origin: None,
                }])
            }
            Certificate::GFamilyLeaf { family } => {
                let path = format!("{path}/g_family({family})");
                let fam = self.ctx.family(family)?;
                let dom = self.ctx.module(&fam.domain)?;
                let cod = self.ctx.module(&fam.codomain)?;
                let Some(action) = &fam.index_action else {
                    self.structural(&path, false, "family has no index action");
                    return Ok(Vec::new());
                };
                let (Some(ud), Some(uc)) = (dom.g_action(), cod.g_action()) else {
                    return Err(Error::StructureMissing(format!("{path}: group actions not registered")));
                };
                let mut subsystem: f64 = 0.0;
                let mut identity: f64 = 0.0;
                for (t, row) in action.iter().enumerate() {
                    for (i, psi) in fam.members.iter().enumerate() {
                        let target = &fam.members[row[i]];
                        for (b, image) in psi.domain().basis().iter().zip(psi.images()) {
                            let moved = ud[t].conjugate(b);
                            subsystem = subsystem.max(target.domain().membership_residual(&moved));
                            let lhs = target.apply(&moved);
                            identity = identity.max(lhs.max_abs_diff(&uc[t].conjugate(image)));
                        }
                    }
                }
                self.checks.push(CheckResult::residual(
                    format!("{path}/subsystems"),
                    subsystem,
                    self.tol(),
                ));
                self.checks.push(CheckResult::residual(
                    format!("{path}/family-identity"),
                    identity,
                    self.tol(),
                ));
                Ok(self.family_members(&path, family, fam))
            }
            Certificate::GCofamilyLeaf { family } => {
                let path = format!("{path}/g_cofamily({family})");
                let fam = self.ctx.family(family)?;
                let dom = self.ctx.module(&fam.domain)?;
                let cod = self.ctx.module(&fam.codomain)?;
                let Some(index_map) = &fam.index_map else {
                    self.structural(&path, false, "cofamily has no index map");
                    return Ok(Vec::new());
                };
                let (Some(cd), Some(cc)) = (dom.coaction(), cod.coaction()) else {
                    return Err(Error::StructureMissing(format!("{path}: coactions not registered")));
                };
                let mut subsystem: f64 = 0.0;
                let mut identity: f64 = 0.0;
                for (i, psi) in fam.members.iter().enumerate() {
                    let target = &fam.members[index_map[i]];
                    for (b, image) in psi.domain().basis().iter().zip(psi.images()) {
                        let z = cd.apply(b);
                        for part in group_components(&z, cd.lambdas()) {
                            subsystem = subsystem.max(target.domain().membership_residual(&part));
                        }
                        let lhs = target.tensor_id_group(&z, cd.lambdas());
                        identity = identity.max(lhs.max_abs_diff(&cc.apply(image)));
                    }
                }
                self.checks.push(CheckResult::residual(
                    format!("{path}/subsystems"),
                    subsystem,
                    self.tol(),
                ));
                self.checks.push(CheckResult::residual(
                    format!("{path}/cofamily-identity"),
                    identity,
                    self.tol(),
                ));
                Ok(self.family_members(&path, family, fam))
            }
            Certificate::ConjugateDomain { element, member, child } => {
                let path = format!("{path}/conjugate_domain({element})");
                let mut members = self.eval(child, &path)?;
                let b = self.ctx.element(element)?.clone();
                let Some(psi) = self.pick(&path, &members, *member).cloned() else {
                    return Ok(members);
                };
                let dom = psi.map.domain().clone();
                let fits = b.shape() == (dom.ambient_dim(), dom.ambient_dim())
                    && dom
                        .basis()
                        .iter()
                        .all(|x| dom.contains(&b.matmul(x).matmul(&b.adjoint()), self.tol()));
                if !self.structural(&path, fits, "b x b* leaves the domain") {
                    return Ok(members);
                }
                let map = LinearMapOp::from_fn(dom, psi.map.codomain_dim(), |x| psi.map.apply(&b.conjugate(x)))?;
                self.certify_cp(&path, &map);
                members.push(Member {
                    map,
                    origin: None,
                    ..psi
                });
                Ok(members)
            }
            Certificate::ConjugateCodomain { element, member, child } => {
                let path = format!("{path}/conjugate_codomain({element})");
                let mut members = self.eval(child, &path)?;
                let d = self.ctx.element(element)?.clone();
                let Some(psi) = self.pick(&path, &members, *member).cloned() else {
                    return Ok(members);
                };
                let cod = self.ctx.module(&psi.codomain)?.space();
                if !self.structural(&path, cod.contains(&d, self.tol()), "d is not in the codomain") {
                    return Ok(members);
                }
                let map = LinearMapOp::from_fn(psi.map.domain().clone(), psi.map.codomain_dim(), |x| {
                    d.conjugate(&psi.map.apply(x))
                })?;
                self.certify_cp(&path, &map);
                members.push(Member {
                    map,
                    origin: None,
                    ..psi
                });
                Ok(members)
            }
            Certificate::Sum { children } => {
                let path = format!("{path}/sum");
                let mut all = Vec::new();
                let mut summands = Vec::new();
                for (k, c) in children.iter().enumerate() {
                    let members = self.eval(c, &format!("{path}[{k}]"))?;
                    if let Some(last) = members.last() {
                        summands.push(last.clone());
                    }
                    all.extend(members);
                }
                if !self.structural(
                    &path,
                    !summands.is_empty() && summands.len() == children.len(),
                    "empty summand",
                ) {
                    return Ok(all);
                }
                let mut total = summands[0].map.clone();
                for s in &summands[1..] {
                    match total.add(&s.map) {
                        Ok(t) => total = t,
                        Err(_) => {
                            self.structural(&path, false, "summands do not share a domain");
                            return Ok(all);
                        }
                    }
                }
                self.certify_cp(&path, &total);
                all.push(Member {
                    map: total,
                    origin: None,
                    ..summands[0].clone()
                });
                Ok(all)
            }
            Certificate::PositiveMultiple { factor, member, child } => {
                let path = format!("{path}/multiple({factor})");
                let mut members = self.eval(child, &path)?;
                let Some(psi) = self.pick(&path, &members, *member).cloned() else {
                    return Ok(members);
                };
                if !self.structural(
                    &path,
                    factor.is_finite() && *factor >= 0.0,
                    "factor must be nonnegative",
                ) {
                    return Ok(members);
                }
                let map = psi.map.scale(*factor);
                self.certify_cp(&path, &map);
                members.push(Member {
                    map,
                    origin: None,
                    ..psi
                });
                Ok(members)
            }
            Certificate::Compose { outer, inner } => {
                let path = format!("{path}/compose");
                let inner_members = self.eval(inner, &format!("{path}.inner"))?;
                let outer_members = self.eval(outer, &format!("{path}.outer"))?;
                let mut out = Vec::new();
                for phi in &inner_members {
                    for psi in &outer_members {
                        if phi.codomain != psi.domain {
                            continue;
                        }
                        if let Ok(map) = psi.map.compose(&phi.map) {
                            self.certify_cp(&path, &map);
                            out.push(Member {
                                map,
                                domain: phi.domain.clone(),
                                codomain: psi.codomain.clone(),
                                origin: None,
                            });
                        }
                    }
                }
                self.structural(&path, !out.is_empty(), "no composable pair");
                Ok(out)
            }
            Certificate::TranslateAction {
                element,
                side,
                member,
                child,
            } => {
                let path = format!("{path}/translate_action({element},{side:?})");
                let mut members = self.eval(child, &path)?;
                let t = self
                    .ctx
                    .group
                    .index_of(element)
                    .map_err(|e| Error::IncompleteCertificate(e.to_string()))?;
                let Some(psi) = self.pick(&path, &members, *member).cloned() else {
                    return Ok(members);
                };
                let map = match side {
                    Side::Codomain => {
                        let cod = self.ctx.module(&psi.codomain)?;
                        let Some(us) = cod.g_action() else {
                            return Err(Error::StructureMissing(format!("{path}: codomain has no group action")));
                        };
                        let u = us[t].clone();
                        LinearMapOp::from_fn(psi.map.domain().clone(), psi.map.codomain_dim(), |x| {
                            u.conjugate(&psi.map.apply(x))
                        })?
                    }
                    Side::Domain => {
                        let dom = self.ctx.module(&psi.domain)?;
                        let Some(us) = dom.g_action() else {
                            return Err(Error::StructureMissing(format!("{path}: domain has no group action")));
                        };
                        let u = us[t].clone();
                        let target = match &psi.origin {
                            Some((name, i)) => {
                                let fam = self.ctx.family(name)?;
                                match &fam.index_action {
                                    Some(action) => fam.members[action[t][*i]].clone(),
                                    None => psi.map.clone(),
                                }
                            }
                            None => psi.map.clone(),
                        };
                        let fits = psi
                            .map
                            .domain()
                            .basis()
                            .iter()
                            .all(|x| target.domain().contains(&u.conjugate(x), self.tol()));
                        if !self.structural(&path, fits, "α_t(x) leaves the domain of the translated map") {
                            return Ok(members);
                        }
                        LinearMapOp::from_fn(psi.map.domain().clone(), psi.map.codomain_dim(), |x| {
                            target.apply(&u.conjugate(x))
                        })?
                    }
                };
                self.certify_cp(&path, &map);
                members.push(Member {
                    map,
                    origin: None,
                    ..psi
                });
                Ok(members)
            }
            Certificate::TranslateCoaction {
                functional,
                side,
                member,
                child,
            } => {
                let path = format!("{path}/translate_coaction({functional},{side:?})");
                let mut members = self.eval(child, &path)?;
                let values = self.ctx.group_functionals.get(functional).ok_or_else(|| {
                    Error::IncompleteCertificate(format!("group functional {functional:?} is not bound"))
                })?;
                if !self.structural(
                    &path,
                    values.len() == self.ctx.group.order(),
                    "functional needs one value per group element",
                ) {
                    return Ok(members);
                }
                let Some(psi) = self.pick(&path, &members, *member).cloned() else {
                    return Ok(members);
                };
                let slice = |z: &ComplexMatrix, lambdas: &[ComplexMatrix]| -> ComplexMatrix {
                    let parts = group_components(z, lambdas);
                    let mut out = ComplexMatrix::zeros(parts[0].rows(), parts[0].cols());
                    for (p, c) in parts.iter().zip(values) {
                        out += &p.scale(*c);
                    }
                    out
                };
                let map = match side {
                    Side::Codomain => {
                        let cod = self.ctx.module(&psi.codomain)?;
                        let Some(delta) = cod.coaction() else {
                            return Err(Error::StructureMissing(format!("{path}: codomain has no coaction")));
                        };
                        LinearMapOp::from_fn(psi.map.domain().clone(), psi.map.codomain_dim(), |x| {
                            slice(&delta.apply(&psi.map.apply(x)), delta.lambdas())
                        })?
                    }
                    Side::Domain => {
                        let dom = self.ctx.module(&psi.domain)?;
                        let Some(delta) = dom.coaction() else {
                            return Err(Error::StructureMissing(format!("{path}: domain has no coaction")));
                        };
                        let target = match &psi.origin {
                            Some((name, i)) => {
                                let fam = self.ctx.family(name)?;
                                match &fam.index_map {
                                    Some(map) => fam.members[map[*i]].clone(),
                                    None => psi.map.clone(),
                                }
                            }
                            None => psi.map.clone(),
                        };
                        let fits = psi.map.domain().basis().iter().all(|x| {
                            target
                                .domain()
                                .contains(&slice(&delta.apply(x), delta.lambdas()), self.tol())
                        });
                        if !self.structural(&path, fits, "sliced coaction leaves the domain") {
                            return Ok(members);
                        }
                        LinearMapOp::from_fn(psi.map.domain().clone(), psi.map.codomain_dim(), |x| {
                            target.apply(&slice(&delta.apply(x), delta.lambdas()))
                        })?
                    }
                };
                self.certify_cp(&path, &map);
                members.push(Member {
                    map,
                    origin: None,
                    ..psi
                });
                Ok(members)
            }
            Certificate::Union { children } => {
                let path = format!("{path}/union");
                let mut all: Vec<Member> = Vec::new();
                for (k, c) in children.iter().enumerate() {
                    all.extend(self.eval(c, &format!("{path}[{k}]"))?);
                }
                let same_codomain = all.windows(2).all(|w| w[0].codomain == w[1].codomain);
                self.structural(
                    &path,
                    same_codomain && !all.is_empty(),
                    "members have different codomains",
                );
                Ok(all)
            }
        }
    }

    fn family_members(&mut self, path: &str, name: &str, fam: &FamilyBinding) -> Vec<Member> {
        fam.members
            .iter()
            .enumerate()
            .map(|(i, psi)| {
                self.certify_cp(&format!("{path}[{i}]"), psi);
                Member {
                    map: psi.clone(),
                    domain: fam.domain.clone(),
                    codomain: fam.codomain.clone(),
                    origin: Some((name.to_string(), i)),
                }
            })
            .collect()
    }
}
