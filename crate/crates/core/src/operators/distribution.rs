//! Evidence sources: finite-support distributions, optionally reweighted by
//! the current state, and fixed scripts.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::graph_ops::Evidence;
use super::{OperatorError, OperatorResult};
use crate::embedding::{EmbeddedState, EmbeddingConfig, DEFAULT_PRESENCE_EPS};
use crate::graph::NodeKind;

/// State-dependent multiplier for one support item. Must be finite and `>= 0`.
pub type ReweightFn<E> = Arc<dyn Fn(&DVector<f64>, &E) -> f64 + Send + Sync>;

/// Where the loop gets its next evidence item.
pub trait EvidenceSource<E> {
    fn draw(&self, step: usize, theta: &DVector<f64>, rng: &mut ChaCha8Rng) -> OperatorResult<E>;
}

/// Finite-support distribution `P(· | θ)`.
#[derive(Clone)]
pub struct EvidenceDistribution<E> {
    items: Vec<(E, f64)>,
    reweight: Option<ReweightFn<E>>,
}

impl<E: fmt::Debug> fmt::Debug for EvidenceDistribution<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EvidenceDistribution")
            .field("items", &self.items)
            .field("reweighted", &self.reweight.is_some())
            .finish()
    }
}

impl<E> EvidenceDistribution<E> {
    /// Base weights must be finite and non-negative. Zero-weight items stay in
    /// the list but lie outside the support.
    pub fn new(items: Vec<(E, f64)>) -> OperatorResult<Self> {
        if let Some(&(_, w)) = items.iter().find(|(_, w)| !(w.is_finite() && *w >= 0.0)) {
            return Err(OperatorError::InvalidMultiplier(w));
        }
        Ok(Self { items, reweight: None })
    }

    pub fn uniform(items: Vec<E>) -> Self {
        Self {
            items: items.into_iter().map(|e| (e, 1.0)).collect(),
            reweight: None,
        }
    }

    pub fn with_reweight(mut self, reweight: ReweightFn<E>) -> Self {
        self.reweight = Some(reweight);
        self
    }

    pub fn items(&self) -> &[(E, f64)] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Normalised effective probabilities at `θ`, one per item.
    pub fn probabilities(&self, theta: &DVector<f64>) -> OperatorResult<Vec<f64>> {
        let mut weights = Vec::with_capacity(self.items.len());
        for (e, base) in &self.items {
            let m = self.reweight.as_ref().map_or(1.0, |f| f(theta, e));
            if !(m.is_finite() && m >= 0.0) {
                return Err(OperatorError::InvalidMultiplier(m));
            }
            weights.push(base * m);
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(OperatorError::EmptySupport);
        }
        Ok(weights.into_iter().map(|w| w / total).collect())
    }

    /// Items with positive probability at `θ`, paired with that probability.
    pub fn support(&self, theta: &DVector<f64>) -> OperatorResult<Vec<(&E, f64)>> {
        let probs = self.probabilities(theta)?;
        Ok(self
            .items
            .iter()
            .zip(probs)
            .filter(|(_, p)| *p > 0.0)
            .map(|((e, _), p)| (e, p))
            .collect())
    }

    pub fn sample_index(&self, theta: &DVector<f64>, rng: &mut ChaCha8Rng) -> OperatorResult<usize> {
        let probs = self.probabilities(theta)?;
        let index = WeightedIndex::new(&probs).map_err(|_| OperatorError::EmptySupport)?;
        Ok(index.sample(rng))
    }

    pub fn sample<'a>(&'a self, theta: &DVector<f64>, rng: &mut ChaCha8Rng) -> OperatorResult<&'a E> {
        let i = self.sample_index(theta, rng)?;
        Ok(&self.items[i].0)
    }
}

impl<E: Clone> EvidenceSource<E> for EvidenceDistribution<E> {
    fn draw(&self, _step: usize, theta: &DVector<f64>, rng: &mut ChaCha8Rng) -> OperatorResult<E> {
        self.sample(theta, rng).cloned()
    }
}

/// One draw from `dist` at `state` using a fresh generator seeded with `seed`.
pub fn sample_evidence<'a, E>(dist: &'a EvidenceDistribution<E>, state: &DVector<f64>, seed: u64) -> OperatorResult<&'a E> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    dist.sample(state, &mut rng)
}

/// Evidence presented in a fixed order; step `t` yields item `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvidenceScript<E> {
    items: Vec<E>,
}

impl<E> EvidenceScript<E> {
    pub fn new(items: Vec<E>) -> Self {
        Self { items }
    }

    pub fn items(&self) -> &[E] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

impl<E: Clone> EvidenceSource<E> for EvidenceScript<E> {
    fn draw(&self, step: usize, _theta: &DVector<f64>, _rng: &mut ChaCha8Rng) -> OperatorResult<E> {
        self.items
            .get(step)
            .cloned()
            .ok_or(OperatorError::ScriptExhausted {
                step,
                len: self.items.len(),
            })
    }
}

/// Favour evidence that resolves questions still open in the current state:
/// multiplier `1 + #(resolves targeting a present OpenQuestion)`.
pub fn coverage_reweight(config: EmbeddingConfig) -> ReweightFn<Evidence> {
    Arc::new(move |theta: &DVector<f64>, e: &Evidence| {
        let Ok(state) = EmbeddedState::from_vector(config, theta.clone()) else {
            return 1.0;
        };
        let open = e
            .resolves
            .iter()
            .filter(|r| {
                let slot = r.question.0 as usize;
                slot < config.n_max
                    && state.is_present(slot, DEFAULT_PRESENCE_EPS)
                    && state.kind(slot) == NodeKind::OpenQuestion
            })
            .count();
        1.0 + open as f64
    })
}
