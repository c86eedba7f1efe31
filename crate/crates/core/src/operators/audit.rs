//! Empirical check of a declared contraction modulus.

use nalgebra::DVector;
use serde::Serialize;

use super::{OperatorError, OperatorResult};

/// Relative slack on the claimed modulus, absorbing last-bit rounding in
/// the ratio of two differences.
pub const AUDIT_RELATIVE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionAudit {
    pub max_ratio: f64,
    pub rho_claimed: f64,
    pub pairs_evaluated: usize,
    pub pairs_skipped: usize,
    pub passed: bool,
}

/// Sample `n_pairs` state pairs and report the largest observed
/// `‖Q(θ₁) − Q(θ₂)‖ / ‖θ₁ − θ₂‖`. Identical pairs are skipped.
pub fn audit_contraction<F, S>(consolidate: F, mut sampler: S, n_pairs: usize, rho_claimed: f64) -> OperatorResult<ContractionAudit>
where
    F: Fn(&DVector<f64>) -> OperatorResult<DVector<f64>>,
    S: FnMut() -> (DVector<f64>, DVector<f64>),
{
    if n_pairs == 0 {
        return Err(OperatorError::InvalidParameter("audit needs at least one pair".into()));
    }
    let mut max_ratio = 0.0f64;
    let mut evaluated = 0;
    let mut skipped = 0;
    for _ in 0..n_pairs {
        let (a, b) = sampler();
        let gap = (&a - &b).norm();
        if gap == 0.0 {
            skipped += 1;
            continue;
        }
        let ratio = (consolidate(&a)? - consolidate(&b)?).norm() / gap;
        max_ratio = max_ratio.max(ratio);
        evaluated += 1;
    }
    if evaluated == 0 {
        return Err(OperatorError::InvalidParameter("every sampled pair was degenerate".into()));
    }
    Ok(ContractionAudit {
        max_ratio,
        rho_claimed,
        pairs_evaluated: evaluated,
        pairs_skipped: skipped,
        passed: max_ratio <= rho_claimed * (1.0 + AUDIT_RELATIVE_SLACK),
    })
}
