//! Order-gap termination.
//!
//! At every step the driver draws `e_t`, evaluates both orderings
//! `Q(P_e(θ_t))` and `P_e(Q(θ_t))` on that same `e_t`, records their distance
//! `Ω_t`, and advances with the expand-then-consolidate branch. It stops at
//! the first step where the last `w` gaps average to at most `ε`, or when the
//! budget runs out.
//!
//! Steps are 1-based in traces: record `t` holds `θ_t`, the evidence `e_t`
//! that produced it, and `Ω_t = Ω(θ_{t-1}; e_t)`.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::operators::{EvidenceItem, EvidenceSource, OperatorError, OperatorPair};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TerminationError {
    #[error("invalid loop configuration: {0}")]
    InvalidConfig(String),
    #[error("window of {need} needs at least {need} records, trace has {have}")]
    InsufficientHistory { have: usize, need: usize },
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

pub type TerminationResult<T> = Result<T, TerminationError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopConfig {
    /// Threshold `ε` on the windowed gap.
    pub epsilon: f64,
    /// Window width `w`.
    pub window: usize,
    /// Budget `T_max`.
    pub budget: usize,
    #[serde(default)]
    pub seed: u64,
}

impl LoopConfig {
    pub fn validate(&self) -> TerminationResult<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(TerminationError::InvalidConfig(format!(
                "epsilon {} must be finite and non-negative",
                self.epsilon
            )));
        }
        if self.window == 0 {
            return Err(TerminationError::InvalidConfig("window must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    ThresholdMet,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRecord {
    /// Step `t >= 1`.
    pub step: usize,
    /// Index of the state the gap was evaluated at (`t - 1`).
    pub evaluated_at: usize,
    pub evidence_id: String,
    /// `Ω_t`.
    pub omega: f64,
    /// `Ω̂_{t,w}`, present once `t >= w`.
    pub windowed: Option<f64>,
    /// `θ_t`.
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapTrace {
    pub initial: Vec<f64>,
    pub window: usize,
    pub records: Vec<GapRecord>,
    pub stop_step: Option<usize>,
    pub stop_reason: Option<StopReason>,
}

impl GapTrace {
    pub fn new(initial: &DVector<f64>, window: usize) -> Self {
        Self {
            initial: initial.as_slice().to_vec(),
            window,
            records: Vec::new(),
            stop_step: None,
            stop_reason: None,
        }
    }

    pub fn omegas(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.omega)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `θ_t` for `0 <= t <= len`.
    pub fn state_at(&self, t: usize) -> Option<&[f64]> {
        if t == 0 {
            Some(&self.initial)
        } else {
            self.records.get(t - 1).map(|r| r.theta.as_slice())
        }
    }
}

fn window_mean(omegas: &[f64], w: usize) -> f64 {
    omegas[omegas.len() - w..].iter().sum::<f64>() / w as f64
}

/// Mean of the last `w` gaps in the trace.
pub fn windowed_gap(trace: &GapTrace, w: usize) -> TerminationResult<f64> {
    let omegas: Vec<f64> = trace.omegas().collect();
    windowed_mean(&omegas, w)
}

/// Mean of the last `w` entries of `omegas`.
pub fn windowed_mean(omegas: &[f64], w: usize) -> TerminationResult<f64> {
    if w == 0 {
        return Err(TerminationError::InvalidConfig("window must be at least 1".into()));
    }
    if omegas.len() < w {
        return Err(TerminationError::InsufficientHistory {
            have: omegas.len(),
            need: w,
        });
    }
    Ok(window_mean(omegas, w))
}

/// Both orderings of one step, evaluated on the same evidence.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderBranches {
    /// `Q(P_e(θ))`, the state the loop actually moves to.
    pub expand_first: DVector<f64>,
    /// `P_e(Q(θ))`.
    pub consolidate_first: DVector<f64>,
    pub gap: f64,
}

pub fn order_branches<P: OperatorPair>(pair: &P, theta: &DVector<f64>, evidence: &P::Evidence) -> TerminationResult<OrderBranches> {
    let expand_first = pair.consolidate(&pair.expand(theta, evidence)?)?;
    let consolidate_first = pair.expand(&pair.consolidate(theta)?, evidence)?;
    let gap = (&expand_first - &consolidate_first).norm();
    Ok(OrderBranches {
        expand_first,
        consolidate_first,
        gap,
    })
}

/// `Ω(θ; e) = ‖Q(P_e(θ)) − P_e(Q(θ))‖`.
pub fn order_gap<P: OperatorPair>(pair: &P, theta: &DVector<f64>, evidence: &P::Evidence) -> TerminationResult<f64> {
    Ok(order_branches(pair, theta, evidence)?.gap)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopOutcome {
    pub final_state: DVector<f64>,
    pub trace: GapTrace,
}

impl LoopOutcome {
    pub fn steps(&self) -> usize {
        self.trace.stop_step.unwrap_or(self.trace.records.len())
    }
}

fn drive<P, S>(pair: &P, source: &S, theta0: &DVector<f64>, config: &LoopConfig, budget: usize, early_stop: bool) -> TerminationResult<LoopOutcome>
where
    P: OperatorPair,
    S: EvidenceSource<P::Evidence> + ?Sized,
{
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut theta = theta0.clone();
    let mut trace = GapTrace::new(theta0, config.window);
    let mut omegas = Vec::with_capacity(budget);

    for t in 0..budget {
        let evidence = source.draw(t, &theta, &mut rng)?;
        let branches = order_branches(pair, &theta, &evidence)?;
        theta = branches.expand_first;
        omegas.push(branches.gap);
        let windowed = (omegas.len() >= config.window).then(|| window_mean(&omegas, config.window));
        trace.records.push(GapRecord {
            step: t + 1,
            evaluated_at: t,
            evidence_id: evidence.id().to_owned(),
            omega: branches.gap,
            windowed,
            theta: theta.as_slice().to_vec(),
        });
        if early_stop && windowed.is_some_and(|m| m <= config.epsilon) {
            trace.stop_step = Some(t + 1);
            trace.stop_reason = Some(StopReason::ThresholdMet);
            return Ok(LoopOutcome {
                final_state: theta,
                trace,
            });
        }
    }
    trace.stop_step = Some(budget);
    trace.stop_reason = Some(StopReason::BudgetExhausted);
    Ok(LoopOutcome {
        final_state: theta,
        trace,
    })
}

/// Recursive reasoning with order-gap termination.
pub fn run_loop<P, S>(pair: &P, source: &S, theta0: &DVector<f64>, config: &LoopConfig) -> TerminationResult<LoopOutcome>
where
    P: OperatorPair,
    S: EvidenceSource<P::Evidence> + ?Sized,
{
    drive(pair, source, theta0, config, config.budget, true)
}

/// Same dynamics for exactly `budget` steps, no early stop. The window and
/// seed of `config` still apply; its threshold and budget are ignored.
pub fn fixed_budget_loop<P, S>(
    pair: &P,
    source: &S,
    theta0: &DVector<f64>,
    budget: usize,
    config: &LoopConfig,
) -> TerminationResult<LoopOutcome>
where
    P: OperatorPair,
    S: EvidenceSource<P::Evidence> + ?Sized,
{
    drive(pair, source, theta0, config, budget, false)
}
