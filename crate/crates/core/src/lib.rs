//! Rigidity analysis for finite bar-joint frameworks and tensegrities, with
//! truncation diagnostics for countably infinite families.
//!
//! The field-generic layers ([`linalg::Matrix`], [`linalg::elimination`],
//! [`rigidity::RigidityMatrix`], [`cones::simplex`], stress matrices and
//! energies) are written over [`Scalar`], implemented for `f32`, `f64` and
//! exact rationals. Spectral routines are `f64` only.

pub mod cones;
pub mod error;
pub mod infinite;
pub mod linalg;
pub mod model;
pub mod prestress;
pub mod rigidity;
pub mod scalar;
pub mod suites;
pub mod tensegrity;

pub use error::{Error, Result};
pub use model::{
    expand_to_cable_strut, parse_framework, to_canonical_json, validate, Coordinate, Diagnostic,
    Framework, Member, MemberKind, StressField, Tensegrity, ToleranceContext, VelocityField,
};
pub use scalar::Scalar;

/// Exact rational scalar used by the certificate-exact code paths.
pub type Exact = num_rational::BigRational;

pub type RigidityMatrixF64 = rigidity::RigidityMatrix<f64>;
pub type RigidityMatrixExact = rigidity::RigidityMatrix<Exact>;
pub type StressFieldExact = model::StressField<Exact>;
pub type VelocityFieldExact = model::VelocityField<Exact>;
pub type MatrixF64 = linalg::Matrix<f64>;
pub type MatrixExact = linalg::Matrix<Exact>;
