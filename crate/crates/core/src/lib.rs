//! Diagonalization of quadratic boson, fermion, and coordinate Hamiltonians
//! by Bogoliubov-Valatin and canonical transformations.

pub mod bv;
pub mod corpus;
pub mod dirac;
pub mod dynamics;
pub mod error;
pub mod form;
pub mod gramschmidt;
pub mod matrix;
pub mod spectral;
pub mod tol;

pub use bv::{
    diagonalize, diagonalize_boson, diagonalize_fermion, diagonalize_normal, diagonalize_pairing,
    verify, Diagonalization, DiagonalizeOptions, Mode, ModeTag, VerificationReport,
};
pub use dirac::{diagonalize_coord, kv_fast_path};
pub use dynamics::{build_dynamic_matrix, dynamic_matrix, heisenberg_apply, DynamicMatrix};
pub use error::{Classification, Error, Result};
pub use form::{
    assemble_coefficient_matrix, canonical_metric, BosonForm, CoefficientMatrix, CoordForm,
    FermionForm, FormKind, Metric, MetricKind, PairingForm, QuadraticForm, Statistics,
};
pub use gramschmidt::{g_inner, orthonormalize_cluster, orthonormalize_zero_space, NormalizedVector};
pub use matrix::{CMat, CVec};
pub use spectral::{
    apply_partner, classify, eigen_decompose, pair_modes, EigenCluster, Eigensystem, ModePair,
    PartnerRule,
};
pub use tol::Tolerances;
