use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebras::JsonMatrix;
use crate::crossed::CrossedSystem;
use crate::error::{Error, Result};
use crate::linalg::{min_hermitian_eigenvalue, norm, ComplexMatrix};

/// How to build an amenability field; group elements are given by label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldDescriptor {
    /// `T(s) = |G|^{-1/2}` everywhere.
    Constant,
    /// `T(s) = |S|^{-1/2}` on `S`, zero elsewhere.
    Truncated { support: Vec<String> },
    /// Arbitrary central values; unlisted elements get zero.
    Explicit { values: BTreeMap<String, JsonMatrix> },
}

/// A finitely supported `T: G → Z(A)⁺` with `Σ_s T(s)² = 1`.
#[derive(Debug, Clone)]
pub struct AmenabilityField {
    system: Arc<CrossedSystem>,
    values: Vec<ComplexMatrix>,
    support: Vec<usize>,
}

pub fn build_field(sys: &CrossedSystem, descriptor: &FieldDescriptor) -> Result<AmenabilityField> {
    let g = sys.group();
    let d = sys.dim();
    let unit = sys
        .algebra()
        .unit()
        .cloned()
        .ok_or_else(|| Error::NotUnital("fields need a unital algebra".into()))?;
    let mut values = vec![ComplexMatrix::zeros(d, d); g.order()];
    match descriptor {
        FieldDescriptor::Constant => {
            let c = (g.order() as f64).powf(-0.5);
            for v in &mut values {
                *v = unit.scale_real(c);
            }
        }
        FieldDescriptor::Truncated { support } => {
            if support.is_empty() {
                return Err(Error::InvalidInput("truncated field needs a nonempty support".into()));
            }
            let c = (support.len() as f64).powf(-0.5);
            for label in support {
                let s = g.index_of(label)?;
                if values[s].max_abs() != 0.0 {
                    return Err(Error::InvalidInput(format!("element {label} listed twice")));
                }
                values[s] = unit.scale_real(c);
            }
        }
        FieldDescriptor::Explicit { values: given } => {
            for (label, m) in given {
                let s = g.index_of(label)?;
                let m = m.to_matrix()?;
                if m.shape() != (d, d) {
                    return Err(Error::InvalidInput(format!("value at {label} must be {d}x{d}")));
                }
                values[s] = m;
            }
        }
    }
    AmenabilityField::new(sys, values)
}

impl AmenabilityField {
    /// Validates centrality, positivity and normalization of the given values
    /// (one per group element).
    pub fn new(sys: &CrossedSystem, values: Vec<ComplexMatrix>) -> Result<Self> {
        let tols = sys.tolerances();
        if values.len() != sys.group().order() {
            return Err(Error::InvalidInput("field needs one value per group element".into()));
        }
        let algebra = sys.algebra();
        let mut support = Vec::new();
        let mut total = ComplexMatrix::zeros(sys.dim(), sys.dim());
        for (s, t) in values.iter().enumerate() {
            if t.max_abs() == 0.0 {
                continue;
            }
            support.push(s);
            let reject = |reason: String| Error::NotCentralPositive { element: s, reason };
            if !algebra.contains(t, tols.identity_tol) {
                return Err(reject("not in the algebra".into()));
            }
            let commutator = algebra
                .basis()
                .iter()
                .map(|b| t.matmul(b).max_abs_diff(&b.matmul(t)))
                .fold(0.0, f64::max);
            if commutator > tols.identity_tol {
                return Err(reject(format!("commutator residual {commutator:.3e}")));
            }
            let lowest = min_hermitian_eigenvalue(t, tols.identity_tol).map_err(|e| reject(e.to_string()))?;
            if lowest < -tols.psd_tol {
                return Err(reject(format!("eigenvalue {lowest:.3e}")));
            }
            total += &t.matmul(t);
        }
        let unit = algebra.unit().expect("checked by callers or by the algebra");
        let residual = norm(&(&total - unit));
        if residual > tols.identity_tol {
            return Err(Error::NotNormalized { residual });
        }
        Ok(Self {
            system: Arc::new(sys.clone()),
            values,
            support,
        })
    }

    pub fn system(&self) -> &CrossedSystem {
        &self.system
    }

    pub fn value(&self, s: usize) -> &ComplexMatrix {
        &self.values[s]
    }

    pub fn values(&self) -> &[ComplexMatrix] {
        &self.values
    }

    /// Elements with `T(s) ≠ 0`, in group order.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// Norm of `Σ_s (T(s) − α_t(T(t⁻¹s)))* (T(s) − α_t(T(t⁻¹s)))`.
    pub fn defect(&self, t: usize) -> f64 {
        let sys = &self.system;
        let g = sys.group();
        let mut total = ComplexMatrix::zeros(sys.dim(), sys.dim());
        for s in g.elements() {
            let diff = &self.values[s] - &sys.alpha(t, &self.values[g.mul(g.inv(t), s)]);
            total += &diff.adjoint().matmul(&diff);
        }
        norm(&total)
    }

    /// `max_t defect(t)`.
    pub fn max_defect(&self) -> f64 {
        self.system
            .group()
            .elements()
            .map(|t| self.defect(t))
            .fold(0.0, f64::max)
    }
}

pub fn defect(field: &AmenabilityField, t: usize) -> f64 {
    field.defect(t)
}
