//! Error surface of the library.

use num_complex::Complex64;
use thiserror::Error;

/// Spectral verdict for a dynamic matrix. `PhysicallyDiagonalizable` means
/// diagonalizable with an all-real spectrum; the other two variants carry the
/// witness that ruled it out.
#[derive(Clone, Debug, PartialEq)]
pub enum Classification {
    PhysicallyDiagonalizable,
    /// An eigenvalue cluster whose mean kept a nonzero imaginary part.
    ComplexSpectrum { witness: Complex64, margin: f64 },
    /// A real eigenvalue cluster with too few independent eigenvectors.
    /// `margin` is the smallest singular value that refused to vanish.
    Defective {
        omega: f64,
        algebraic: usize,
        geometric: usize,
        margin: f64,
    },
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Classification::PhysicallyDiagonalizable => write!(f, "physically diagonalizable"),
            Classification::ComplexSpectrum { witness, margin } => write!(
                f,
                "complex eigenvalue {:.6}{:+.6}i (imaginary part exceeds threshold by factor {:.2e})",
                witness.re, witness.im, margin
            ),
            Classification::Defective {
                omega,
                algebraic,
                geometric,
                ..
            } => {
                let o = if omega.abs() < 1e-12 { 0.0 } else { *omega };
                write!(
                    f,
                    "defective eigenvalue {o:.6} (algebraic multiplicity {algebraic}, geometric {geometric})"
                )
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// An input block failed its symmetry or finiteness requirement.
    #[error("structural violation: {0}")]
    StructuralViolation(String),

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("index {index} out of range for a field of dimension {size}")]
    IndexOutOfRange { index: usize, size: usize },

    /// The backing eigensolver or factorization did not converge.
    #[error("solver failure: {0}")]
    SolverFailure(String),

    /// The metric restricted to an invariant subspace lost rank, so no
    /// orthonormal basis with norms +-1 exists there.
    #[error("degenerate metric on invariant subspace: {0}")]
    DegenerateMetric(String),

    /// Mode pairing broke down (odd zero space, unmatched +/- clusters).
    #[error("mode pairing failed: {0}")]
    PairingFailure(String),

    #[error("not diagonalizable: {0}")]
    NotDiagonalizable(Classification),

    #[error("matrix not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("missing parameter `{0}`")]
    MissingParameter(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
