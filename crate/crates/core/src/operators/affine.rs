//! Affine operators around a shared anchor `θ*`:
//!
//! ```text
//! Q(θ)   = θ* + A   (θ - θ*)
//! P_e(θ) = θ* + B_e (θ - θ*)
//! ```
//!
//! Every `P_e` fixes the anchor, so the redundancy condition holds there by
//! construction and the Jacobians are exactly `A` and `B_e`.

use nalgebra::{DMatrix, DVector};

use super::{check_dim, EvidenceItem, OperatorError, OperatorPair, OperatorResult};

#[derive(Debug, Clone, PartialEq)]
pub struct AffineEvidence {
    pub id: String,
    pub map: DMatrix<f64>,
}

impl EvidenceItem for AffineEvidence {
    fn id(&self) -> &str {
        &self.id
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffinePair {
    anchor: DVector<f64>,
    consolidation: DMatrix<f64>,
    declared_modulus: f64,
}

impl AffinePair {
    /// The declared modulus is the spectral norm of the consolidation map.
    pub fn new(anchor: DVector<f64>, consolidation: DMatrix<f64>) -> OperatorResult<Self> {
        let d = anchor.len();
        if consolidation.shape() != (d, d) {
            return Err(OperatorError::Dimension {
                expected: d,
                found: consolidation.nrows(),
            });
        }
        let declared_modulus = consolidation.clone().svd(false, false).singular_values.max();
        Ok(Self {
            anchor,
            consolidation,
            declared_modulus,
        })
    }

    pub fn anchor(&self) -> &DVector<f64> {
        &self.anchor
    }

    pub fn consolidation_matrix(&self) -> &DMatrix<f64> {
        &self.consolidation
    }
}

impl OperatorPair for AffinePair {
    type Evidence = AffineEvidence;

    fn expand(&self, theta: &DVector<f64>, evidence: &AffineEvidence) -> OperatorResult<DVector<f64>> {
        check_dim(theta, self.anchor.len())?;
        if evidence.map.shape() != (theta.len(), theta.len()) {
            return Err(OperatorError::Dimension {
                expected: theta.len(),
                found: evidence.map.nrows(),
            });
        }
        Ok(&self.anchor + &evidence.map * (theta - &self.anchor))
    }

    fn consolidate(&self, theta: &DVector<f64>) -> OperatorResult<DVector<f64>> {
        check_dim(theta, self.anchor.len())?;
        Ok(&self.anchor + &self.consolidation * (theta - &self.anchor))
    }

    fn contraction_modulus(&self) -> f64 {
        self.declared_modulus
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchor_is_fixed_by_every_map() {
        let anchor = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let pair = AffinePair::new(anchor.clone(), DMatrix::from_diagonal_element(3, 3, 0.5)).unwrap();
        let e = AffineEvidence {
            id: "e".into(),
            map: DMatrix::from_fn(3, 3, |i, j| (i + 2 * j) as f64),
        };
        assert_eq!(pair.expand(&anchor, &e).unwrap(), anchor);
        assert_eq!(pair.consolidate(&anchor).unwrap(), anchor);
        assert!((pair.contraction_modulus() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_mismatched_shapes() {
        let anchor = DVector::zeros(2);
        assert!(AffinePair::new(anchor.clone(), DMatrix::identity(3, 3)).is_err());
        let pair = AffinePair::new(anchor, DMatrix::identity(2, 2)).unwrap();
        let e = AffineEvidence {
            id: "e".into(),
            map: DMatrix::identity(3, 3),
        };
        assert!(pair.expand(&DVector::zeros(2), &e).is_err());
        assert!(pair.consolidate(&DVector::zeros(3)).is_err());
    }
}
