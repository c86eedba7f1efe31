//! Linearisation at the consolidation fixed point.
//!
//! With `θ*` a fixed point of `Q` at which every supported `P_e` is also
//! stationary, each evidence item contributes a commutator
//! `Σ_e = DQ·DP_e − DP_e·DQ`. The Gramian `G = Σ_e p_e Σ_eᵀ Σ_e` is positive
//! definite on a subspace `W` exactly when no nonzero `v ∈ W` lies in every
//! `ker Σ_e`. Both sides of that equivalence are computed here independently:
//! [`nondegeneracy_check`] by eigenvalues of the compressed Gramian, and
//! [`kernel_intersection_oracle`] by the null space of the stacked
//! commutators.
//!
//! Only finite evidence supports are handled.

mod coverage;
mod fixed_point;
mod gramian;
mod jacobian;

pub use coverage::{coverage_check, coverage_table, resolution_direction, resolution_direction_for_graph, CoverageEntry};
pub use fixed_point::{find_fixed_point, FixedPoint};
pub use gramian::{
    commutator, commutator_from_jacobians, gramian, gramian_from_commutators, kernel_intersection_oracle,
    nondegeneracy_check, Commutator, Gramian, KernelVerdict, NondegeneracyVerdict, Subspace,
};
pub use jacobian::{jacobian_step_sweep, numerical_jacobian, Jacobian};

use thiserror::Error;

use crate::embedding::EmbeddingError;
use crate::graph::{NodeId, NodeKind};
use crate::operators::OperatorError;

/// Central-difference step.
pub const DEFAULT_STEP: f64 = 1e-5;
/// Largest `‖P_e(θ*) − θ*‖` accepted as redundancy.
pub const DEFAULT_REDUNDANCY_TOL: f64 = 1e-8;
/// Positive-definiteness cutoff, relative to the largest Gramian eigenvalue.
pub const DEFAULT_EIGEN_REL_TOL: f64 = 1e-8;
/// Null-space cutoff, relative to the largest singular value.
pub const DEFAULT_SVD_REL_TOL: f64 = 1e-8;
/// Smallest `‖Σ_e v_q‖` counted as coverage.
pub const DEFAULT_COVERAGE_TOL: f64 = 1e-6;
/// Subspace orthonormality tolerance.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("no fixed point after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        theta: Vec<f64>,
    },
    #[error("non-finite derivative in column {coordinate}")]
    NonFinite { coordinate: usize },
    #[error("redundancy fails for evidence {evidence_id}: ‖P_e(θ*) − θ*‖ = {norm:e}")]
    RedundancyViolated { evidence_id: String, norm: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid subspace: {0}")]
    InvalidSubspace(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("node {id} is {found:?}, expected an open question")]
    WrongKind { id: NodeId, found: NodeKind },
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("resolving {0} leaves the embedding unchanged")]
    ZeroDirection(NodeId),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

pub type SpectralResult<T> = Result<T, SpectralError>;

/// Step sizes and tolerances for a spectral analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralOptions {
    pub step: f64,
    pub redundancy_tol: f64,
    pub eigen_rel_tol: f64,
    pub svd_rel_tol: f64,
    pub coverage_tol: f64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            step: DEFAULT_STEP,
            redundancy_tol: DEFAULT_REDUNDANCY_TOL,
            eigen_rel_tol: DEFAULT_EIGEN_REL_TOL,
            svd_rel_tol: DEFAULT_SVD_REL_TOL,
            coverage_tol: DEFAULT_COVERAGE_TOL,
        }
    }
}
