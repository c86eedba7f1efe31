//! Graph-valued expansion and consolidation, written as coordinate updates on
//! the embedded state so that slots never move during a run.
//!
//! Node ids seen by these operators are slot indices, matching the ids that
//! [`decode`](crate::embedding::decode) assigns.

use std::collections::BTreeSet;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{EvidenceItem, OperatorError, OperatorPair, OperatorResult};
use crate::embedding::{EmbeddedState, EmbeddingConfig, DEFAULT_PRESENCE_EPS};
use crate::graph::{EdgeType, NodeId, NodeKind, DEFAULT_DELTA};

/// Claims closer than this are merged by consolidation.
pub const DEFAULT_MERGE_EPS: f64 = 1e-6;

/// An incoming claim within this distance of a present claim is not new and
/// reuses that claim's slot. Must exceed any finite-difference step used to
/// differentiate the expansion.
pub const DEFAULT_DEDUP_EPS: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClaimSpec {
    pub attr: Vec<f64>,
    pub confidence: f64,
    #[serde(default)]
    pub provenance: String,
}

/// Edge from the evidence's `claim`-th claim to an existing node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSpec {
    pub claim: usize,
    pub target: NodeId,
    pub kind: EdgeType,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Resolution {
    pub question: NodeId,
    pub attr: Vec<f64>,
    pub confidence: f64,
}

/// One piece of structured evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Evidence {
    pub id: String,
    #[serde(default)]
    pub claims: Vec<ClaimSpec>,
    #[serde(default)]
    pub links: Vec<LinkSpec>,
    #[serde(default)]
    pub resolves: Vec<Resolution>,
}

impl Evidence {
    pub fn empty(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            claims: Vec::new(),
            links: Vec::new(),
            resolves: Vec::new(),
        }
    }
}

impl EvidenceItem for Evidence {
    fn id(&self) -> &str {
        &self.id
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConsolidationParams {
    pub rho: f64,
    #[serde(default = "default_merge_eps")]
    pub merge_eps: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_presence_eps")]
    pub presence_eps: f64,
}

fn default_merge_eps() -> f64 {
    DEFAULT_MERGE_EPS
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

fn default_presence_eps() -> f64 {
    DEFAULT_PRESENCE_EPS
}

impl ConsolidationParams {
    pub fn new(rho: f64) -> Self {
        Self {
            rho,
            merge_eps: DEFAULT_MERGE_EPS,
            delta: DEFAULT_DELTA,
            presence_eps: DEFAULT_PRESENCE_EPS,
        }
    }

    pub fn validate(&self) -> OperatorResult<()> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(OperatorError::RhoOutOfRange(self.rho));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(OperatorError::InvalidParameter(format!("delta {} outside (0, 1)", self.delta)));
        }
        if !(self.merge_eps >= 0.0 && self.merge_eps.is_finite()) {
            return Err(OperatorError::InvalidParameter(format!("merge_eps {}", self.merge_eps)));
        }
        if !(self.presence_eps >= 0.0 && self.presence_eps < 1.0) {
            return Err(OperatorError::InvalidParameter(format!(
                "presence_eps {}",
                self.presence_eps
            )));
        }
        Ok(())
    }
}

fn unit_weight(value: f64) -> OperatorResult<()> {
    if value > 0.0 && value <= 1.0 {
        Ok(())
    } else {
        Err(OperatorError::InvalidWeight(value))
    }
}

fn attr_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn target_slot(state: &EmbeddedState, id: NodeId, eps: f64) -> OperatorResult<usize> {
    let slot = id.0 as usize;
    if slot >= state.config().n_max || !state.is_present(slot, eps) {
        return Err(OperatorError::UnknownTarget(id));
    }
    Ok(slot)
}

/// `P_e`: add the evidence's new claims, promote the open questions it
/// resolves, then link the claims to existing nodes.
///
/// Claims within `dedup_eps` of a present claim are treated as already known
/// and reuse that slot; links are written as `max(old, new)`; resolving an
/// already-resolved question is a no-op. Re-applying absorbed evidence is
/// therefore the identity.
pub fn graph_expand(
    state: &EmbeddedState,
    evidence: &Evidence,
    dedup_eps: f64,
    presence_eps: f64,
) -> OperatorResult<EmbeddedState> {
    let cfg = *state.config();
    for claim in &evidence.claims {
        if claim.attr.len() != cfg.k {
            return Err(OperatorError::Dimension {
                expected: cfg.k,
                found: claim.attr.len(),
            });
        }
        unit_weight(claim.confidence)?;
    }
    for link in &evidence.links {
        unit_weight(link.weight)?;
        if link.claim >= evidence.claims.len() {
            return Err(OperatorError::UnknownClaimIndex {
                index: link.claim,
                count: evidence.claims.len(),
            });
        }
    }
    for res in &evidence.resolves {
        unit_weight(res.confidence)?;
        if res.attr.len() != cfg.k {
            return Err(OperatorError::Dimension {
                expected: cfg.k,
                found: res.attr.len(),
            });
        }
    }

    let mut next = state.clone();
    let mut free = state.free_slots(presence_eps).into_iter();
    let mut claim_slots = Vec::with_capacity(evidence.claims.len());
    let mut needed = 0;
    for claim in &evidence.claims {
        let existing = next.occupied_slots(presence_eps).into_iter().find(|&s| {
            next.kind(s) == NodeKind::Claim && attr_distance(&next.attr(s), &claim.attr) <= dedup_eps
        });
        let slot = match existing {
            Some(slot) => slot,
            None => {
                needed += 1;
                let slot = free.next().ok_or(OperatorError::CapacityExceeded {
                    needed,
                    free: state.free_slots(presence_eps).len(),
                })?;
                next.clear_slot(slot);
                next.set_node(slot, NodeKind::Claim, &claim.attr, claim.confidence);
                slot
            }
        };
        claim_slots.push(slot);
    }

    for res in &evidence.resolves {
        let q = target_slot(&next, res.question, presence_eps)?;
        match next.kind(q) {
            NodeKind::OpenQuestion => next.set_node(q, NodeKind::PartialAnswer, &res.attr, res.confidence),
            NodeKind::PartialAnswer => {}
            found => {
                return Err(OperatorError::WrongKind {
                    id: res.question,
                    found,
                })
            }
        }
    }

    for link in &evidence.links {
        let src = claim_slots[link.claim];
        let dst = target_slot(&next, link.target, presence_eps)?;
        let dst_kind = next.kind(dst);
        if src == dst || !link.kind.allows_stored(NodeKind::Claim, dst_kind) {
            return Err(OperatorError::TypeViolation {
                kind: link.kind,
                src: NodeKind::Claim,
                dst: dst_kind,
            });
        }
        let (a, b) = if link.kind == EdgeType::Contradicts {
            (src.min(dst), src.max(dst))
        } else {
            (src, dst)
        };
        let w = next.edge_weight(a, b, link.kind).max(link.weight);
        next.set_edge_weight(a, b, link.kind, w);
    }
    Ok(next)
}

/// `Q`: downweight contradicted claims, merge duplicate claims, and shift
/// confidence toward the best-supported partial answer.
///
/// 1. For each `Contradicts` pair with both confidences above `delta`, the
///    lower-confidence endpoint (larger slot on ties) is multiplied by `rho`,
///    at most once per application.
/// 2. Claim pairs with attribute distance `<= merge_eps` merge into the lower
///    slot with confidence `1 - (1 - c_i)(1 - c_j)`; edges are re-pointed and
///    the higher slot is zeroed.
/// 3. When several partial answers are present, those with support strictly
///    below the maximum have their confidence multiplied by `rho`. Support is
///    `Σ w(claim → answer) · c(claim)` over `Supports` edges. An answer whose
///    confidence drops to `presence_eps` or below is removed.
pub fn graph_consolidate(state: &EmbeddedState, params: &ConsolidationParams) -> OperatorResult<EmbeddedState> {
    params.validate()?;
    let eps = params.presence_eps;
    let n = state.config().n_max;
    let mut next = state.clone();

    let claims: Vec<usize> = next
        .occupied_slots(eps)
        .into_iter()
        .filter(|&s| next.kind(s) == NodeKind::Claim)
        .collect();

    let mut losers = BTreeSet::new();
    for (idx, &i) in claims.iter().enumerate() {
        for &j in &claims[idx + 1..] {
            let w = next
                .edge_weight(i, j, EdgeType::Contradicts)
                .max(next.edge_weight(j, i, EdgeType::Contradicts));
            let (ci, cj) = (next.confidence(i), next.confidence(j));
            if w > eps && ci > params.delta && cj > params.delta {
                losers.insert(if ci < cj { i } else { j });
            }
        }
    }
    for slot in losers {
        let c = next.confidence(slot);
        next.set_confidence(slot, params.rho * c);
    }

    let mut merged = BTreeSet::new();
    for (idx, &i) in claims.iter().enumerate() {
        if merged.contains(&i) {
            continue;
        }
        for &j in &claims[idx + 1..] {
            if merged.contains(&j) || attr_distance(&next.attr(i), &next.attr(j)) > params.merge_eps {
                continue;
            }
            let combined = 1.0 - (1.0 - next.confidence(i)) * (1.0 - next.confidence(j));
            next.set_confidence(i, combined);
            repoint_edges(&mut next, j, i);
            next.clear_slot(j);
            merged.insert(j);
        }
    }

    let answers: Vec<usize> = next
        .occupied_slots(eps)
        .into_iter()
        .filter(|&s| next.kind(s) == NodeKind::PartialAnswer)
        .collect();
    if answers.len() > 1 {
        let support = |a: usize| -> f64 {
            (0..n)
                .filter(|&s| s != a && next.is_present(s, eps) && next.kind(s) == NodeKind::Claim)
                .map(|s| next.edge_weight(s, a, EdgeType::Supports) * next.confidence(s))
                .sum()
        };
        let scores: Vec<f64> = answers.iter().map(|&a| support(a)).collect();
        let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (&a, &score) in answers.iter().zip(&scores) {
            if score < best {
                let c = params.rho * next.confidence(a);
                if c <= eps {
                    next.clear_slot(a);
                } else {
                    next.set_confidence(a, c);
                }
            }
        }
    }
    Ok(next)
}

/// Move every edge touching `from` onto `to`, keeping the larger weight and
/// dropping edges that would become self-loops.
fn repoint_edges(state: &mut EmbeddedState, from: usize, to: usize) {
    let n = state.config().n_max;
    for other in (0..n).filter(|&o| o != from && o != to) {
        for kind in EdgeType::ALL {
            let out = state.edge_weight(from, other, kind);
            let inc = state.edge_weight(other, from, kind);
            for (w, src, dst) in [(out, to, other), (inc, other, to)] {
                if w == 0.0 {
                    continue;
                }
                let (a, b) = if kind == EdgeType::Contradicts {
                    (src.min(dst), src.max(dst))
                } else {
                    (src, dst)
                };
                let merged = state.edge_weight(a, b, kind).max(w);
                state.set_edge_weight(a, b, kind, merged);
            }
        }
    }
}

/// Graph operators on a fixed embedding layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphOperators {
    config: EmbeddingConfig,
    params: ConsolidationParams,
    dedup_eps: f64,
}

impl GraphOperators {
    pub fn new(config: EmbeddingConfig, params: ConsolidationParams) -> OperatorResult<Self> {
        params.validate()?;
        Ok(Self {
            config,
            params,
            dedup_eps: DEFAULT_DEDUP_EPS,
        })
    }

    pub fn with_dedup_eps(mut self, dedup_eps: f64) -> Self {
        self.dedup_eps = dedup_eps;
        self
    }

    pub fn config(&self) -> &EmbeddingConfig {
        &self.config
    }

    pub fn params(&self) -> &ConsolidationParams {
        &self.params
    }

    fn wrap(&self, theta: &DVector<f64>) -> OperatorResult<EmbeddedState> {
        Ok(EmbeddedState::from_vector(self.config, theta.clone())?)
    }
}

impl OperatorPair for GraphOperators {
    type Evidence = Evidence;

    fn expand(&self, theta: &DVector<f64>, evidence: &Evidence) -> OperatorResult<DVector<f64>> {
        let state = self.wrap(theta)?;
        Ok(graph_expand(&state, evidence, self.dedup_eps, self.params.presence_eps)?.into_vector())
    }

    fn consolidate(&self, theta: &DVector<f64>) -> OperatorResult<DVector<f64>> {
        let state = self.wrap(theta)?;
        Ok(graph_consolidate(&state, &self.params)?.into_vector())
    }

    fn contraction_modulus(&self) -> f64 {
        self.params.rho
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{decode, embed};
    use crate::graph::EpistemicStateGraph;
    use approx::assert_abs_diff_eq;

    const EPS: f64 = DEFAULT_PRESENCE_EPS;

    fn claim(attr: Vec<f64>, confidence: f64) -> ClaimSpec {
        ClaimSpec {
            attr,
            confidence,
            provenance: "test".into(),
        }
    }

    fn base_graph() -> EpistemicStateGraph {
        // slots: 0 claim, 1 answer, 2 question
        let mut g = EpistemicStateGraph::new(2, 5).unwrap();
        let c = g.add_claim(vec![0.1, 0.9], 0.8, "").unwrap();
        let a = g.add_partial_answer(vec![0.5, 0.5], 0.6, "").unwrap();
        let q = g.add_open_question(vec![0.3, 0.3], 0.2, "").unwrap();
        g.add_edge(c, a, EdgeType::Supports, 0.7).unwrap();
        g.add_edge(a, q, EdgeType::Requires, 1.0).unwrap();
        g
    }

    fn state(g: &EpistemicStateGraph) -> EmbeddedState {
        embed(g, &EmbeddingConfig::for_graph(g)).unwrap()
    }

    #[test]
    fn expansion_adds_one_claim() {
        let s = state(&base_graph());
        let mut e = Evidence::empty("e");
        e.claims.push(claim(vec![0.7, 0.2], 0.9));
        let next = graph_expand(&s, &e, DEFAULT_DEDUP_EPS, EPS).unwrap();
        assert_eq!(decode(&next, EPS).node_count(), decode(&s, EPS).node_count() + 1);
    }

    #[test]
    fn expansion_resolves_question() {
        let s = state(&base_graph());
        let mut e = Evidence::empty("e");
        e.resolves.push(Resolution {
            question: NodeId(2),
            attr: vec![0.4, 0.4],
            confidence: 0.7,
        });
        let next = graph_expand(&s, &e, DEFAULT_DEDUP_EPS, EPS).unwrap();
        let g = decode(&next, EPS);
        let node = g.node(NodeId(2)).unwrap();
        assert_eq!(node.kind, NodeKind::PartialAnswer);
        assert_eq!(node.confidence, 0.7);
        assert_eq!(g.edge_weight(NodeId(1), NodeId(2), EdgeType::Requires), Some(1.0));
        // already absorbed
        assert_eq!(graph_expand(&next, &e, DEFAULT_DEDUP_EPS, EPS).unwrap(), next);
    }

    #[test]
    fn empty_evidence_is_identity() {
        let s = state(&base_graph());
        assert_eq!(graph_expand(&s, &Evidence::empty("nil"), DEFAULT_DEDUP_EPS, EPS).unwrap(), s);
    }

    #[test]
    fn links_and_reapplication() {
        let s = state(&base_graph());
        let mut e = Evidence::empty("e");
        e.claims.push(claim(vec![0.7, 0.2], 0.9));
        e.links.push(LinkSpec {
            claim: 0,
            target: NodeId(0),
            kind: EdgeType::Contradicts,
            weight: 0.5,
        });
        e.links.push(LinkSpec {
            claim: 0,
            target: NodeId(2),
            kind: EdgeType::Requires,
            weight: 0.4,
        });
        let once = graph_expand(&s, &e, DEFAULT_DEDUP_EPS, EPS).unwrap();
        let g = decode(&once, EPS);
        assert_eq!(g.contradiction_pairs(), vec![(NodeId(0), NodeId(3), 0.5)]);
        assert_eq!(g.edge_weight(NodeId(3), NodeId(2), EdgeType::Requires), Some(0.4));
        let twice = graph_expand(&once, &e, DEFAULT_DEDUP_EPS, EPS).unwrap();
        assert_eq!(twice, once);
    }

    #[test]
    fn expansion_errors() {
        let mut g = EpistemicStateGraph::new(1, 2).unwrap();
        g.add_claim(vec![0.5], 0.5, "").unwrap();
        g.add_open_question(vec![0.2], 0.5, "").unwrap();
        let s = state(&g);

        let mut full = Evidence::empty("full");
        full.claims.push(claim(vec![0.9], 0.5));
        assert!(matches!(
            graph_expand(&s, &full, DEFAULT_DEDUP_EPS, EPS),
            Err(OperatorError::CapacityExceeded { .. })
        ));

        let mut dangling = Evidence::empty("dangling");
        dangling.resolves.push(Resolution {
            question: NodeId(7),
            attr: vec![0.0],
            confidence: 0.5,
        });
        assert_eq!(
            graph_expand(&s, &dangling, DEFAULT_DEDUP_EPS, EPS),
            Err(OperatorError::UnknownTarget(NodeId(7)))
        );

        let mut wrong = Evidence::empty("wrong");
        wrong.resolves.push(Resolution {
            question: NodeId(0),
            attr: vec![0.0],
            confidence: 0.5,
        });
        assert!(matches!(
            graph_expand(&s, &wrong, DEFAULT_DEDUP_EPS, EPS),
            Err(OperatorError::WrongKind { .. })
        ));

        let mut dup = Evidence::empty("dup");
        dup.claims.push(claim(vec![0.5], 0.9));
        dup.links.push(LinkSpec {
            claim: 0,
            target: NodeId(1),
            kind: EdgeType::Contradicts,
            weight: 0.5,
        });
        assert!(matches!(
            graph_expand(&s, &dup, DEFAULT_DEDUP_EPS, EPS),
            Err(OperatorError::TypeViolation { .. })
        ));
    }

    #[test]
    fn consistent_graph_is_fixed() {
        let s = state(&base_graph());
        let q = graph_consolidate(&s, &ConsolidationParams::new(0.9)).unwrap();
        assert_eq!(q, s);
    }

    #[test]
    fn contradiction_downweights_lower_endpoint() {
        let mut g = EpistemicStateGraph::new(1, 3).unwrap();
        let a = g.add_claim(vec![0.0], 0.9, "").unwrap();
        let b = g.add_claim(vec![1.0], 0.6, "").unwrap();
        g.add_edge(a, b, EdgeType::Contradicts, 1.0).unwrap();
        let q = graph_consolidate(&state(&g), &ConsolidationParams::new(0.9)).unwrap();
        assert_eq!(q.confidence(0), 0.9);
        assert_abs_diff_eq!(q.confidence(1), 0.54, epsilon = 1e-15);
        // 0.54 still above delta, next pass goes below and stops
        let q2 = graph_consolidate(&q, &ConsolidationParams::new(0.9)).unwrap();
        assert_abs_diff_eq!(q2.confidence(1), 0.486, epsilon = 1e-15);
        let q3 = graph_consolidate(&q2, &ConsolidationParams::new(0.9)).unwrap();
        assert_eq!(q3, q2);
    }

    #[test]
    fn contradiction_tie_hits_larger_slot() {
        let mut g = EpistemicStateGraph::new(1, 2).unwrap();
        let a = g.add_claim(vec![0.0], 0.8, "").unwrap();
        let b = g.add_claim(vec![1.0], 0.8, "").unwrap();
        g.add_edge(a, b, EdgeType::Contradicts, 0.5).unwrap();
        let q = graph_consolidate(&state(&g), &ConsolidationParams::new(0.5)).unwrap();
        assert_eq!(q.confidence(0), 0.8);
        assert_eq!(q.confidence(1), 0.4);
    }

    #[test]
    fn duplicate_claims_merge_with_noisy_or() {
        let mut g = EpistemicStateGraph::new(2, 4).unwrap();
        let a = g.add_claim(vec![0.3, 0.3], 0.5, "").unwrap();
        let b = g.add_claim(vec![0.3, 0.3], 0.5, "").unwrap();
        let ans = g.add_partial_answer(vec![1.0, 0.0], 0.5, "").unwrap();
        g.add_edge(b, ans, EdgeType::Supports, 0.6).unwrap();
        let mut params = ConsolidationParams::new(0.9);
        params.merge_eps = 0.0;
        let q = graph_consolidate(&state(&g), &params).unwrap();
        let d = decode(&q, EPS);
        assert_eq!(d.node_count(), 2);
        assert_abs_diff_eq!(d.node(NodeId(0)).unwrap().confidence, 0.75, epsilon = 1e-15);
        assert!(d.node(NodeId(1)).is_none());
        assert_eq!(d.edge_weight(a, NodeId(2), EdgeType::Supports), Some(0.6));
        assert_eq!(b, NodeId(1));
    }

    #[test]
    fn weaker_answers_decay() {
        let mut g = EpistemicStateGraph::new(1, 4).unwrap();
        let c = g.add_claim(vec![0.0], 0.9, "").unwrap();
        let strong = g.add_partial_answer(vec![0.5], 0.5, "").unwrap();
        let weak = g.add_partial_answer(vec![0.7], 0.5, "").unwrap();
        g.add_edge(c, strong, EdgeType::Supports, 1.0).unwrap();
        g.add_edge(c, weak, EdgeType::Supports, 0.2).unwrap();
        let q = graph_consolidate(&state(&g), &ConsolidationParams::new(0.8)).unwrap();
        assert_eq!(q.confidence(1), 0.5);
        assert_abs_diff_eq!(q.confidence(2), 0.4, epsilon = 1e-15);
    }

    #[test]
    fn answers_with_equal_support_are_left_alone() {
        let mut g = EpistemicStateGraph::new(1, 3).unwrap();
        g.add_partial_answer(vec![0.5], 0.5, "").unwrap();
        g.add_partial_answer(vec![0.7], 0.3, "").unwrap();
        let s = state(&g);
        assert_eq!(graph_consolidate(&s, &ConsolidationParams::new(0.8)).unwrap(), s);
    }

    #[test]
    fn params_are_validated() {
        let mut p = ConsolidationParams::new(1.0);
        assert!(p.validate().is_err());
        p.rho = 0.5;
        p.delta = 0.0;
        assert!(p.validate().is_err());
        let cfg = EmbeddingConfig::new(2, 1).unwrap();
        assert!(GraphOperators::new(cfg, ConsolidationParams::new(0.0)).is_err());
    }

    #[test]
    fn operator_pair_dimension_check() {
        let cfg = EmbeddingConfig::new(2, 1).unwrap();
        let ops = GraphOperators::new(cfg, ConsolidationParams::new(0.9)).unwrap();
        assert!(ops.consolidate(&DVector::zeros(3)).is_err());
        assert_eq!(ops.consolidate(&DVector::zeros(cfg.dim())).unwrap(), DVector::zeros(cfg.dim()));
    }
}
