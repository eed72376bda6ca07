//! Dense complex linear algebra at small dimension, plus validated quantum
//! objects: states, density operators, projectors and projective
//! decompositions (PVMs), and basis rotations that fix one axis.
//!
//! Every type enforces its invariants at construction and is immutable
//! afterwards, so values can be shared and sent across threads freely.

mod eigen;
mod ket;
mod matrix;
mod projector;
mod rotation;

pub use ket::Ket;
pub use matrix::ComplexMatrix;
pub use projector::{DensityOperator, ProjectiveDecomposition, Projector};
pub use rotation::{rotate_fixing_axis, rotate_fixing_axis_phased, rotation_angle_count};

pub(crate) use eigen::hermitian_eigenvalues;

use thiserror::Error;

/// Validation and arithmetic errors for the linear-algebra layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QlaError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("entry array has {len} elements, expected {dim}x{dim}")]
    NotSquare { dim: usize, len: usize },

    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("ket norm deviates from 1 by {deviation:.3e}")]
    NotNormalized { deviation: f64 },

    #[error("matrix deviates from Hermitian by {deviation:.3e}")]
    NotHermitian { deviation: f64 },

    #[error("trace deviates from 1 by {deviation:.3e}")]
    NonUnitTrace { deviation: f64 },

    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:.3e}")]
    NotPositiveSemidefinite { eigenvalue: f64 },

    #[error("matrix deviates from idempotent by {deviation:.3e}")]
    NotIdempotent { deviation: f64 },

    #[error("trace {trace} is not within tolerance of an integer rank")]
    NonIntegerRank { trace: f64 },

    #[error("kets {first} and {second} are not orthogonal: |overlap| = {overlap:.3e}")]
    KetsNotOrthogonal {
        first: usize,
        second: usize,
        overlap: f64,
    },

    #[error("blocks {first:?} and {second:?} are not orthogonal: deviation {deviation:.3e}")]
    BlocksNotOrthogonal {
        first: String,
        second: String,
        deviation: f64,
    },

    #[error("expected {expected} kets for dimension {expected}, got {got}")]
    WrongKetCount { expected: usize, got: usize },

    #[error("blocks do not resolve the identity: deviation {deviation:.3e}")]
    Incomplete { deviation: f64 },

    #[error("decomposition has no blocks")]
    EmptyDecomposition,

    #[error("duplicate block label {label:?}")]
    DuplicateLabel { label: String },

    #[error("unknown block label {label:?}")]
    UnknownLabel { label: String },

    #[error("label {label:?} appears in more than one group")]
    GroupOverlap { label: String },

    #[error("label {label:?} is missing from the grouping")]
    GroupMissing { label: String },

    #[error("decomposition must be fine (every block rank 1)")]
    NotFine,

    #[error("expected {expected} rotation angles, got {got}")]
    WrongAngleCount { expected: usize, got: usize },

    #[error("expected {expected} rotation phases, got {got}")]
    WrongPhaseCount { expected: usize, got: usize },
}
