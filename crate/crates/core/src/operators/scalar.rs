//! Closed-form two-coordinate system: confidence `c` and residual
//! uncertainty `u`.
//!
//! ```text
//! P_e(c, u) = (c + α_e (1 - c), u)
//! Q(c, u)   = (c, ρ (1 - c) u)
//! ```
//!
//! Both maps are polynomial, so the pair operates on all of `ℝ²`; only the
//! typed [`ScalarState2D`] API enforces `[0, 1]²`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{check_dim, EvidenceItem, OperatorError, OperatorPair, OperatorResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarState2D {
    pub c: f64,
    pub u: f64,
}

impl ScalarState2D {
    pub fn new(c: f64, u: f64) -> OperatorResult<Self> {
        let inside = |v: f64| (0.0..=1.0).contains(&v);
        if !inside(c) || !inside(u) {
            return Err(OperatorError::StateOutOfRange([c, u]));
        }
        Ok(Self { c, u })
    }

    pub fn to_vector(self) -> DVector<f64> {
        DVector::from_vec(vec![self.c, self.u])
    }

    pub fn from_vector(theta: &DVector<f64>) -> OperatorResult<Self> {
        check_dim(theta, 2)?;
        Self::new(theta[0], theta[1])
    }
}

fn check_open_unit(value: f64, err: fn(f64) -> OperatorError) -> OperatorResult<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(err(value))
    }
}

fn expand_raw(c: f64, u: f64, alpha: f64) -> (f64, f64) {
    (c + alpha * (1.0 - c), u)
}

fn consolidate_raw(c: f64, u: f64, rho: f64) -> (f64, f64) {
    (c, rho * (1.0 - c) * u)
}

pub fn expand_2d(state: ScalarState2D, alpha: f64) -> OperatorResult<ScalarState2D> {
    check_open_unit(alpha, OperatorError::AlphaOutOfRange)?;
    let (c, u) = expand_raw(state.c, state.u, alpha);
    Ok(ScalarState2D { c, u })
}

pub fn consolidate_2d(state: ScalarState2D, rho: f64) -> OperatorResult<ScalarState2D> {
    check_open_unit(rho, OperatorError::RhoOutOfRange)?;
    let (c, u) = consolidate_raw(state.c, state.u, rho);
    Ok(ScalarState2D { c, u })
}

/// Evidence for the two-coordinate system: an identifier and a relevance
/// weight `α_e ∈ (0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Relevance {
    pub id: String,
    pub alpha: f64,
}

impl Relevance {
    pub fn new(id: impl Into<String>, alpha: f64) -> OperatorResult<Self> {
        check_open_unit(alpha, OperatorError::AlphaOutOfRange)?;
        Ok(Self { id: id.into(), alpha })
    }
}

impl EvidenceItem for Relevance {
    fn id(&self) -> &str {
        &self.id
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarPair {
    rho: f64,
}

impl ScalarPair {
    pub fn new(rho: f64) -> OperatorResult<Self> {
        check_open_unit(rho, OperatorError::RhoOutOfRange)?;
        Ok(Self { rho })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `ρ α (1 - c) u`.
    pub fn closed_form_gap(&self, theta: &DVector<f64>, alpha: f64) -> f64 {
        self.rho * alpha * (1.0 - theta[0]) * theta[1]
    }
}

impl OperatorPair for ScalarPair {
    type Evidence = Relevance;

    fn expand(&self, theta: &DVector<f64>, evidence: &Relevance) -> OperatorResult<DVector<f64>> {
        check_dim(theta, 2)?;
        check_open_unit(evidence.alpha, OperatorError::AlphaOutOfRange)?;
        let (c, u) = expand_raw(theta[0], theta[1], evidence.alpha);
        Ok(DVector::from_vec(vec![c, u]))
    }

    fn consolidate(&self, theta: &DVector<f64>) -> OperatorResult<DVector<f64>> {
        check_dim(theta, 2)?;
        let (c, u) = consolidate_raw(theta[0], theta[1], self.rho);
        Ok(DVector::from_vec(vec![c, u]))
    }

    fn contraction_modulus(&self) -> f64 {
        self.rho
    }
}
