//! Expansion and consolidation operators over embedded states.
//!
//! An [`OperatorPair`] supplies an evidence-indexed expansion `P_e` and an
//! evidence-free consolidation `Q`, both acting on plain `DVector<f64>`
//! states. Three pairs ship with the crate:
//!
//! * [`ScalarPair`]: the closed-form two-coordinate `(c, u)` system
//! * [`GraphOperators`]: graph edits expressed as coordinate updates on the
//!   embedded epistemic state
//! * [`AffinePair`]: affine maps sharing a common anchor point, used to build
//!   linearisations with known Jacobians

mod affine;
mod audit;
mod distribution;
mod graph_ops;
mod scalar;

pub use affine::{AffineEvidence, AffinePair};
pub use audit::{audit_contraction, ContractionAudit, AUDIT_RELATIVE_SLACK};
pub use distribution::{
    coverage_reweight, sample_evidence, EvidenceDistribution, EvidenceScript, EvidenceSource, ReweightFn,
};
pub use graph_ops::{
    graph_consolidate, graph_expand, ClaimSpec, ConsolidationParams, Evidence, GraphOperators, LinkSpec,
    Resolution, DEFAULT_DEDUP_EPS, DEFAULT_MERGE_EPS,
};
pub use scalar::{consolidate_2d, expand_2d, Relevance, ScalarPair, ScalarState2D};

use nalgebra::DVector;
use thiserror::Error;

use crate::embedding::EmbeddingError;
use crate::graph::{EdgeType, NodeId, NodeKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OperatorError {
    #[error("relevance weight {0} outside (0, 1)")]
    AlphaOutOfRange(f64),
    #[error("consolidation rate {0} outside (0, 1)")]
    RhoOutOfRange(f64),
    #[error("state {0:?} outside [0, 1]^2")]
    StateOutOfRange([f64; 2]),
    #[error("state has dimension {found}, expected {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("evidence needs {needed} free slots, {free} available")]
    CapacityExceeded { needed: usize, free: usize },
    #[error("evidence targets absent node {0}")]
    UnknownTarget(NodeId),
    #[error("evidence link references claim index {index} of {count}")]
    UnknownClaimIndex { index: usize, count: usize },
    #[error("{kind:?} link not allowed from {src:?} to {dst:?}")]
    TypeViolation {
        kind: EdgeType,
        src: NodeKind,
        dst: NodeKind,
    },
    #[error("node {id} is {found:?}, cannot be resolved")]
    WrongKind { id: NodeId, found: NodeKind },
    #[error("value {0} outside (0, 1]")]
    InvalidWeight(f64),
    #[error("evidence distribution has no item with positive weight")]
    EmptySupport,
    #[error("reweighting produced invalid multiplier {0}")]
    InvalidMultiplier(f64),
    #[error("evidence script exhausted at step {step} (length {len})")]
    ScriptExhausted { step: usize, len: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

pub type OperatorResult<T> = Result<T, OperatorError>;

/// Anything that can be fed to an expansion operator carries an identifier
/// for traces and reports.
pub trait EvidenceItem {
    fn id(&self) -> &str;
}

/// The expansion family `{P_e}` and consolidation map `Q`.
pub trait OperatorPair {
    type Evidence: EvidenceItem + Clone;

    /// `P_e(θ)`.
    fn expand(&self, theta: &DVector<f64>, evidence: &Self::Evidence) -> OperatorResult<DVector<f64>>;

    /// `Q(θ)`.
    fn consolidate(&self, theta: &DVector<f64>) -> OperatorResult<DVector<f64>>;

    /// Declared contraction modulus of `Q`. Not trusted; see
    /// [`audit_contraction`].
    fn contraction_modulus(&self) -> f64;
}

pub(crate) fn check_dim(theta: &DVector<f64>, expected: usize) -> OperatorResult<()> {
    if theta.len() != expected {
        return Err(OperatorError::Dimension {
            expected,
            found: theta.len(),
        });
    }
    Ok(())
}
