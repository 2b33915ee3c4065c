//! Finite-dimensional numerical checks for equivariant nuclearity of group
//! actions and coactions on C*-algebras.

pub mod algebras;
pub mod check;
pub mod coactions;
pub mod cpmaps;
pub mod crossed;
pub mod error;
pub mod fixtures;
pub mod groups;
pub mod linalg;
pub mod nuclearity;
pub mod random;

pub use algebras::{ActionDescriptor, AlgebraDescriptor, GroupAction, JsonMatrix, StarAlgebra, State};
pub use check::{CheckResult, Comparison};
pub use coactions::GroupAlgebra;
pub use cpmaps::{Certificate, CertificateContext, CpMode, EquivarianceMode, LinearMapOp, OperatorModule};
pub use crossed::{CrossedElement, CrossedSystem, WindowedMatrix};
pub use error::{Error, Result};
pub use groups::{build_group, FiniteGroup, GroupDescriptor, GroupTuple, Window};
pub use linalg::{ComplexMatrix, ToleranceConfig, C64};
pub use nuclearity::{AmenabilityField, FieldDescriptor, NuclearityMode, Witness};
