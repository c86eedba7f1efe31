use nalgebra::DVector;
use serde::Serialize;

use super::{SpectralError, SpectralResult};
use crate::operators::OperatorResult;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPoint {
    pub theta: Vec<f64>,
    pub iterations: usize,
    /// `‖Q(θ) − θ‖` at the returned point.
    pub residual: f64,
}

impl FixedPoint {
    pub fn vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.theta)
    }
}

/// Iterate `θ ← Q(θ)` until `‖Q(θ) − θ‖ <= tol`.
pub fn find_fixed_point<F>(consolidate: F, theta0: &DVector<f64>, tol: f64, max_iter: usize) -> SpectralResult<FixedPoint>
where
    F: Fn(&DVector<f64>) -> OperatorResult<DVector<f64>>,
{
    if !(tol > 0.0) {
        return Err(SpectralError::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    let mut theta = theta0.clone();
    let mut residual = f64::INFINITY;
    for iterations in 0..=max_iter {
        let next = consolidate(&theta)?;
        residual = (&next - &theta).norm();
        if residual <= tol {
            return Ok(FixedPoint {
                theta: theta.as_slice().to_vec(),
                iterations,
                residual,
            });
        }
        if !residual.is_finite() {
            break;
        }
        theta = next;
    }
    Err(SpectralError::NoConvergence {
        iterations: max_iter,
        residual,
        theta: theta.as_slice().to_vec(),
    })
}
