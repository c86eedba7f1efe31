//! Fixed-dimension Euclidean embedding of an epistemic state graph.
//!
//! Layout of `θ ∈ ℝ^d` with `d = (k+1)·n_max + 3·n_max²`:
//!
//! ```text
//! [ slot 0: attr (k) | conf ] ... [ slot n_max-1: attr | conf ]   node block
//! [ w(s, t, type) for s, t in 0..n_max, type in 0..3 ]            adjacency block
//! ```
//!
//! Occupied slots carry a confidence in `(0, 1]`; empty slots are all zero.
//! Edges never join a slot to itself, so the adjacency diagonal is free and
//! holds the node-kind flag: `(s, s, 0) = 1` marks a PartialAnswer and
//! `(s, s, 1) = 1` an OpenQuestion. Claims carry no flag.

use std::collections::BTreeMap;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Edge, EdgeType, EpistemicStateGraph, Node, NodeId, NodeKind};

/// Confidence (and edge weight) below which a slot or edge counts as absent.
pub const DEFAULT_PRESENCE_EPS: f64 = 1e-9;

const KIND_FLAG_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmbeddingError {
    #[error("graph has {nodes} nodes but only {n_max} slots")]
    CapacityExceeded { nodes: usize, n_max: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("embedding configurations differ")]
    ConfigMismatch,
    #[error("embedding dimensions must be positive (k = {k}, n_max = {n_max})")]
    InvalidConfig { k: usize, n_max: usize },
    #[error("node {0} has no slot in the layout")]
    MissingSlot(NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingConfig {
    pub n_max: usize,
    pub k: usize,
}

impl EmbeddingConfig {
    pub fn new(n_max: usize, k: usize) -> Result<Self, EmbeddingError> {
        if n_max == 0 || k == 0 {
            return Err(EmbeddingError::InvalidConfig { k, n_max });
        }
        Ok(Self { n_max, k })
    }

    pub fn for_graph(graph: &EpistemicStateGraph) -> Self {
        Self {
            n_max: graph.n_max(),
            k: graph.k(),
        }
    }

    pub fn edge_type_count(&self) -> usize {
        EdgeType::COUNT
    }

    /// Embedded dimension `d`.
    pub fn dim(&self) -> usize {
        self.node_block_len() + self.n_max * self.n_max * EdgeType::COUNT
    }

    pub fn node_block_len(&self) -> usize {
        (self.k + 1) * self.n_max
    }

    pub fn attr_index(&self, slot: usize, j: usize) -> usize {
        debug_assert!(slot < self.n_max && j < self.k);
        slot * (self.k + 1) + j
    }

    pub fn confidence_index(&self, slot: usize) -> usize {
        slot * (self.k + 1) + self.k
    }

    pub fn adjacency_index(&self, src: usize, dst: usize, kind: EdgeType) -> usize {
        self.adjacency_index_raw(src, dst, kind.index())
    }

    fn adjacency_index_raw(&self, src: usize, dst: usize, type_index: usize) -> usize {
        debug_assert!(src < self.n_max && dst < self.n_max);
        self.node_block_len() + src * self.n_max * EdgeType::COUNT + dst * EdgeType::COUNT + type_index
    }

    /// Index of the kind flag for `slot`, if the kind carries one.
    pub fn kind_flag_index(&self, slot: usize, kind: NodeKind) -> Option<usize> {
        match kind {
            NodeKind::Claim => None,
            NodeKind::PartialAnswer => Some(self.adjacency_index_raw(slot, slot, 0)),
            NodeKind::OpenQuestion => Some(self.adjacency_index_raw(slot, slot, 1)),
        }
    }
}

/// `θ = φ(S)` together with the layout that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateDocument", into = "StateDocument")]
pub struct EmbeddedState {
    config: EmbeddingConfig,
    theta: DVector<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateDocument {
    config: EmbeddingConfig,
    theta: Vec<f64>,
}

impl From<EmbeddedState> for StateDocument {
    fn from(state: EmbeddedState) -> Self {
        StateDocument {
            config: state.config,
            theta: state.theta.as_slice().to_vec(),
        }
    }
}

impl TryFrom<StateDocument> for EmbeddedState {
    type Error = EmbeddingError;

    fn try_from(doc: StateDocument) -> Result<Self, EmbeddingError> {
        EmbeddedState::from_vector(doc.config, DVector::from_vec(doc.theta))
    }
}

impl EmbeddedState {
    pub fn zeros(config: EmbeddingConfig) -> Self {
        Self {
            config,
            theta: DVector::zeros(config.dim()),
        }
    }

    pub fn from_vector(config: EmbeddingConfig, theta: DVector<f64>) -> Result<Self, EmbeddingError> {
        if theta.len() != config.dim() {
            return Err(EmbeddingError::DimensionMismatch {
                expected: config.dim(),
                found: theta.len(),
            });
        }
        Ok(Self { config, theta })
    }

    pub fn config(&self) -> &EmbeddingConfig {
        &self.config
    }

    pub fn theta(&self) -> &DVector<f64> {
        &self.theta
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.theta
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn confidence(&self, slot: usize) -> f64 {
        self.theta[self.config.confidence_index(slot)]
    }

    pub fn set_confidence(&mut self, slot: usize, value: f64) {
        let i = self.config.confidence_index(slot);
        self.theta[i] = value;
    }

    pub fn attr(&self, slot: usize) -> Vec<f64> {
        (0..self.config.k)
            .map(|j| self.theta[self.config.attr_index(slot, j)])
            .collect()
    }

    pub fn is_present(&self, slot: usize, eps: f64) -> bool {
        self.confidence(slot) > eps
    }

    /// Kind read from the diagonal flags. Meaningful only for present slots.
    pub fn kind(&self, slot: usize) -> NodeKind {
        let flag = |kind| {
            self.config
                .kind_flag_index(slot, kind)
                .map_or(0.0, |i| self.theta[i])
        };
        if flag(NodeKind::PartialAnswer) > KIND_FLAG_THRESHOLD {
            NodeKind::PartialAnswer
        } else if flag(NodeKind::OpenQuestion) > KIND_FLAG_THRESHOLD {
            NodeKind::OpenQuestion
        } else {
            NodeKind::Claim
        }
    }

    pub fn set_kind(&mut self, slot: usize, kind: NodeKind) {
        for k in [NodeKind::PartialAnswer, NodeKind::OpenQuestion] {
            let i = self.config.kind_flag_index(slot, k).expect("flagged kind");
            self.theta[i] = if k == kind { 1.0 } else { 0.0 };
        }
    }

    /// Write a node into `slot`, overwriting whatever was there. Edges are
    /// untouched.
    pub fn set_node(&mut self, slot: usize, kind: NodeKind, attr: &[f64], confidence: f64) {
        debug_assert_eq!(attr.len(), self.config.k);
        for (j, &a) in attr.iter().enumerate() {
            let i = self.config.attr_index(slot, j);
            self.theta[i] = a;
        }
        self.set_confidence(slot, confidence);
        self.set_kind(slot, kind);
    }

    /// Zero a slot: its attributes, confidence, kind flags and every incident
    /// edge.
    pub fn clear_slot(&mut self, slot: usize) {
        let cfg = self.config;
        for j in 0..cfg.k {
            self.theta[cfg.attr_index(slot, j)] = 0.0;
        }
        self.theta[cfg.confidence_index(slot)] = 0.0;
        for other in 0..cfg.n_max {
            for t in 0..EdgeType::COUNT {
                self.theta[cfg.adjacency_index_raw(slot, other, t)] = 0.0;
                self.theta[cfg.adjacency_index_raw(other, slot, t)] = 0.0;
            }
        }
    }

    pub fn edge_weight(&self, src: usize, dst: usize, kind: EdgeType) -> f64 {
        self.theta[self.config.adjacency_index(src, dst, kind)]
    }

    pub fn set_edge_weight(&mut self, src: usize, dst: usize, kind: EdgeType, weight: f64) {
        debug_assert_ne!(src, dst, "the diagonal holds kind flags");
        let i = self.config.adjacency_index(src, dst, kind);
        self.theta[i] = weight;
    }

    /// Slots with confidence `<= eps`, ascending.
    pub fn free_slots(&self, eps: f64) -> Vec<usize> {
        (0..self.config.n_max)
            .filter(|&s| !self.is_present(s, eps))
            .collect()
    }

    pub fn occupied_slots(&self, eps: f64) -> Vec<usize> {
        (0..self.config.n_max)
            .filter(|&s| self.is_present(s, eps))
            .collect()
    }

    pub fn distance(&self, other: &EmbeddedState) -> Result<f64, EmbeddingError> {
        state_distance(self, other)
    }
}

/// Assignment of graph nodes to embedding slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotLayout {
    slots: BTreeMap<NodeId, usize>,
}

impl SlotLayout {
    /// Claims by ascending id, then PartialAnswers, then OpenQuestions.
    pub fn canonical(graph: &EpistemicStateGraph) -> Self {
        let mut nodes: Vec<&Node> = graph.nodes().collect();
        nodes.sort_by_key(|n| (n.kind, n.id));
        Self {
            slots: nodes.iter().enumerate().map(|(slot, n)| (n.id, slot)).collect(),
        }
    }

    /// Slot `i` for node id `i`; the layout of a decoded state.
    pub fn by_id(graph: &EpistemicStateGraph) -> Self {
        Self {
            slots: graph.nodes().map(|n| (n.id, n.id.0 as usize)).collect(),
        }
    }

    pub fn slot(&self, id: NodeId) -> Option<usize> {
        self.slots.get(&id).copied()
    }
}

/// `φ(S)` under the canonical slot order.
pub fn embed(graph: &EpistemicStateGraph, config: &EmbeddingConfig) -> Result<EmbeddedState, EmbeddingError> {
    embed_with_layout(graph, config, &SlotLayout::canonical(graph))
}

/// `φ(S)` under a caller-supplied slot assignment.
pub fn embed_with_layout(
    graph: &EpistemicStateGraph,
    config: &EmbeddingConfig,
    layout: &SlotLayout,
) -> Result<EmbeddedState, EmbeddingError> {
    if graph.k() != config.k {
        return Err(EmbeddingError::DimensionMismatch {
            expected: config.k,
            found: graph.k(),
        });
    }
    if graph.node_count() > config.n_max {
        return Err(EmbeddingError::CapacityExceeded {
            nodes: graph.node_count(),
            n_max: config.n_max,
        });
    }
    let slot_of = |id: NodeId| match layout.slot(id) {
        Some(s) if s < config.n_max => Ok(s),
        _ => Err(EmbeddingError::MissingSlot(id)),
    };
    let mut state = EmbeddedState::zeros(*config);
    for node in graph.nodes() {
        state.set_node(slot_of(node.id)?, node.kind, &node.attr, node.confidence);
    }
    for edge in graph.edges() {
        state.set_edge_weight(slot_of(edge.src)?, slot_of(edge.dst)?, edge.kind, edge.weight);
    }
    Ok(state)
}

/// Rebuild a graph from `θ`. Node ids are slot indices. Provenance is not
/// embedded and comes back empty.
pub fn decode(state: &EmbeddedState, presence_eps: f64) -> EpistemicStateGraph {
    let cfg = *state.config();
    let mut graph = EpistemicStateGraph::new(cfg.k, cfg.n_max).expect("config dimensions are positive");
    let present = state.occupied_slots(presence_eps);
    for &slot in &present {
        graph.insert_raw_node(Node {
            id: NodeId(slot as u64),
            kind: state.kind(slot),
            attr: state.attr(slot),
            confidence: state.confidence(slot).min(1.0),
            provenance: String::new(),
        });
    }
    for &src in &present {
        for &dst in &present {
            if src == dst {
                continue;
            }
            for kind in EdgeType::ALL {
                let w = state.edge_weight(src, dst, kind);
                if w <= presence_eps || !kind.allows_stored(state.kind(src), state.kind(dst)) {
                    continue;
                }
                graph.upsert_raw_edge(Edge {
                    src: NodeId(src as u64),
                    dst: NodeId(dst as u64),
                    kind,
                    weight: w.min(1.0),
                });
            }
        }
    }
    graph
}

/// Decode with the configuration check the operation contract asks for.
pub fn decode_checked(
    theta: &DVector<f64>,
    config: &EmbeddingConfig,
    presence_eps: f64,
) -> Result<EpistemicStateGraph, EmbeddingError> {
    let state = EmbeddedState::from_vector(*config, theta.clone())?;
    Ok(decode(&state, presence_eps))
}

/// Euclidean distance between two embedded states of the same layout.
pub fn state_distance(a: &EmbeddedState, b: &EmbeddedState) -> Result<f64, EmbeddingError> {
    if a.config != b.config {
        return Err(EmbeddingError::ConfigMismatch);
    }
    Ok((&a.theta - &b.theta).norm())
}

/// A graph with ids and provenance erased: nodes in canonical order, edges
/// as canonical slot pairs. Two graphs are equal up to id relabelling iff
/// their canonical forms are equal.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalForm {
    pub nodes: Vec<(NodeKind, Vec<f64>, f64)>,
    pub edges: Vec<(usize, usize, EdgeType, f64)>,
}

impl CanonicalForm {
    pub fn of(graph: &EpistemicStateGraph) -> Self {
        let layout = SlotLayout::canonical(graph);
        let mut nodes: Vec<&Node> = graph.nodes().collect();
        nodes.sort_by_key(|n| (n.kind, n.id));
        let mut edges: Vec<_> = graph
            .edges()
            .map(|e| {
                (
                    layout.slot(e.src).unwrap(),
                    layout.slot(e.dst).unwrap(),
                    e.kind,
                    e.weight,
                )
            })
            .collect();
        edges.sort_by_key(|e| (e.0, e.1, e.2));
        Self {
            nodes: nodes
                .into_iter()
                .map(|n| (n.kind, n.attr.clone(), n.confidence))
                .collect(),
            edges,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n_max: usize, k: usize) -> EmbeddingConfig {
        EmbeddingConfig::new(n_max, k).unwrap()
    }

    #[test]
    fn dimension_formula() {
        assert_eq!(cfg(2, 2).dim(), 18);
        assert_eq!(cfg(4, 3).dim(), 16 + 48);
        assert_eq!(cfg(3, 1).edge_type_count(), 3);
    }

    #[test]
    fn empty_graph_embeds_to_zero() {
        let g = EpistemicStateGraph::new(2, 2).unwrap();
        let s = embed(&g, &cfg(2, 2)).unwrap();
        assert_eq!(s.dim(), 18);
        assert!(s.theta().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_claim_fills_slot_zero() {
        let mut g = EpistemicStateGraph::new(2, 2).unwrap();
        g.add_claim(vec![1.0, 0.0], 0.5, "x").unwrap();
        let s = embed(&g, &cfg(2, 2)).unwrap();
        let mut expected = vec![0.0; 18];
        expected[..3].copy_from_slice(&[1.0, 0.0, 0.5]);
        assert_eq!(s.theta().as_slice(), expected.as_slice());
    }

    #[test]
    fn edge_weight_change_moves_one_coordinate() {
        let build = |w| {
            let mut g = EpistemicStateGraph::new(2, 3).unwrap();
            let a = g.add_claim(vec![0.0, 1.0], 0.9, "x").unwrap();
            let b = g.add_claim(vec![1.0, 0.0], 0.8, "x").unwrap();
            g.add_edge(a, b, EdgeType::Supports, w).unwrap();
            embed(&g, &cfg(3, 2)).unwrap()
        };
        let (s1, s2) = (build(0.3), build(0.7));
        let differing = s1
            .theta()
            .iter()
            .zip(s2.theta().iter())
            .filter(|(x, y)| x != y)
            .count();
        assert_eq!(differing, 1);
    }

    #[test]
    fn canonical_order_groups_kinds() {
        let mut g = EpistemicStateGraph::new(1, 4).unwrap();
        let q = g.add_open_question(vec![3.0], 0.1, "").unwrap();
        let a = g.add_partial_answer(vec![2.0], 0.2, "").unwrap();
        let c = g.add_claim(vec![1.0], 0.3, "").unwrap();
        let layout = SlotLayout::canonical(&g);
        assert_eq!(layout.slot(c), Some(0));
        assert_eq!(layout.slot(a), Some(1));
        assert_eq!(layout.slot(q), Some(2));
    }

    #[test]
    fn embed_errors() {
        let mut g = EpistemicStateGraph::new(2, 3).unwrap();
        for i in 0..3 {
            g.add_claim(vec![i as f64, 0.0], 0.5, "").unwrap();
        }
        assert!(matches!(
            embed(&g, &cfg(2, 2)),
            Err(EmbeddingError::CapacityExceeded { .. })
        ));
        assert!(matches!(
            embed(&g, &cfg(3, 1)),
            Err(EmbeddingError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn zero_vector_decodes_to_empty_graph() {
        let g = decode(&EmbeddedState::zeros(cfg(3, 2)), DEFAULT_PRESENCE_EPS);
        assert!(g.is_empty());
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn presence_threshold_drops_low_confidence_nodes() {
        let mut g = EpistemicStateGraph::new(1, 3).unwrap();
        g.add_claim(vec![0.0], 0.95, "").unwrap();
        g.add_claim(vec![1.0], 0.9, "").unwrap();
        g.add_claim(vec![2.0], 0.3, "").unwrap();
        let s = embed(&g, &cfg(3, 1)).unwrap();
        let d = decode(&s, 0.9);
        assert_eq!(d.node_count(), 1);
        assert!(d.nodes().all(|n| n.confidence > 0.9));
    }

    #[test]
    fn decode_checks_dimension() {
        let theta = DVector::zeros(5);
        assert!(matches!(
            decode_checked(&theta, &cfg(2, 2), DEFAULT_PRESENCE_EPS),
            Err(EmbeddingError::DimensionMismatch { expected: 18, found: 5 })
        ));
    }

    #[test]
    fn decode_round_trips_kinds_and_satisfied_requirements() {
        let mut g = EpistemicStateGraph::new(2, 4).unwrap();
        let c = g.add_claim(vec![0.1, 0.2], 0.9, "").unwrap();
        let q1 = g.add_open_question(vec![0.0, 1.0], 0.3, "").unwrap();
        let q2 = g.add_open_question(vec![1.0, 1.0], 0.4, "").unwrap();
        g.add_edge(c, q1, EdgeType::Requires, 0.5).unwrap();
        g.add_edge(c, q2, EdgeType::Requires, 0.6).unwrap();
        g.promote_open_question(q1, vec![0.5, 0.5], 0.7).unwrap();
        let s = embed(&g, &EmbeddingConfig::for_graph(&g)).unwrap();
        let back = decode(&s, DEFAULT_PRESENCE_EPS);
        assert_eq!(CanonicalForm::of(&back), CanonicalForm::of(&g));
    }

    #[test]
    fn distances() {
        let c = cfg(1, 1);
        let a = EmbeddedState::zeros(c);
        assert_eq!(state_distance(&a, &a).unwrap(), 0.0);
        let mut b = a.clone();
        b.set_confidence(0, 1.0);
        assert_eq!(state_distance(&a, &b).unwrap(), 1.0);
        let other = EmbeddedState::zeros(cfg(2, 1));
        assert_eq!(state_distance(&a, &other), Err(EmbeddingError::ConfigMismatch));
    }

    #[test]
    fn embedding_is_deterministic() {
        let mut g = EpistemicStateGraph::new(2, 3).unwrap();
        g.add_claim(vec![0.3, 0.1], 0.4, "").unwrap();
        g.add_open_question(vec![0.0, 0.2], 0.6, "").unwrap();
        let c = cfg(3, 2);
        let a = embed(&g, &c).unwrap();
        let b = embed(&g, &c).unwrap();
        assert!(a
            .theta()
            .iter()
            .zip(b.theta().iter())
            .all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn state_json_round_trip() {
        let mut s = EmbeddedState::zeros(cfg(1, 1));
        s.set_confidence(0, 0.25);
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.starts_with("{\"config\""));
        let back: EmbeddedState = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        let bad = r#"{"config":{"n_max":1,"k":1},"theta":[0.0]}"#;
        assert!(serde_json::from_str::<EmbeddedState>(bad).is_err());
    }
}
