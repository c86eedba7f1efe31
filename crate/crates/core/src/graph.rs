//! Epistemic state graph.
//!
//! A graph of Claim, PartialAnswer and OpenQuestion nodes joined by typed,
//! weighted edges. Every node carries a `k`-dimensional attribute vector and a
//! confidence in `(0, 1]`; every edge carries a weight in `(0, 1]`.
//!
//! Endpoint typing:
//!
//! * `Supports`: Claim → Claim, or Claim → PartialAnswer
//! * `Requires`: Claim or PartialAnswer → OpenQuestion
//! * `Contradicts`: Claim ↔ Claim, stored once with `src < dst`
//!
//! A `Requires` edge whose target has been promoted to a PartialAnswer is kept
//! as a satisfied requirement, so stored graphs also accept `Requires` edges
//! ending at a PartialAnswer. New ones cannot be added that way.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default consistency threshold.
pub const DEFAULT_DELTA: f64 = 0.5;

/// Opaque node identifier. Assigned by a per-graph monotone counter and never
/// reused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// Node kind. The derived order is the canonical slot order of the embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Claim,
    PartialAnswer,
    OpenQuestion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeType {
    Supports,
    Requires,
    Contradicts,
}

impl EdgeType {
    pub const ALL: [EdgeType; 3] = [EdgeType::Supports, EdgeType::Requires, EdgeType::Contradicts];
    pub const COUNT: usize = 3;

    /// Position of this type in the adjacency tensor.
    pub fn index(self) -> usize {
        match self {
            EdgeType::Supports => 0,
            EdgeType::Requires => 1,
            EdgeType::Contradicts => 2,
        }
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    /// Whether a new edge of this type may run from `src` to `dst`.
    pub fn allows(self, src: NodeKind, dst: NodeKind) -> bool {
        use NodeKind::*;
        match self {
            EdgeType::Supports => src == Claim && matches!(dst, Claim | PartialAnswer),
            EdgeType::Requires => matches!(src, Claim | PartialAnswer) && dst == OpenQuestion,
            EdgeType::Contradicts => src == Claim && dst == Claim,
        }
    }

    /// Whether a stored edge is well-typed, counting satisfied requirements.
    pub fn allows_stored(self, src: NodeKind, dst: NodeKind) -> bool {
        self.allows(src, dst)
            || (self == EdgeType::Requires
                && matches!(src, NodeKind::Claim | NodeKind::PartialAnswer)
                && dst == NodeKind::PartialAnswer)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
    pub attr: Vec<f64>,
    pub confidence: f64,
    pub provenance: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub src: NodeId,
    pub dst: NodeId,
    pub kind: EdgeType,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("graph capacity of {n_max} nodes exceeded")]
    CapacityExceeded { n_max: usize },
    #[error("confidence {0} outside (0, 1]")]
    InvalidConfidence(f64),
    #[error("edge weight {0} outside (0, 1]")]
    InvalidWeight(f64),
    #[error("attribute vector has length {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("attribute vector contains a non-finite value")]
    NonFiniteAttr,
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("{kind:?} edge not allowed from {src:?} to {dst:?}")]
    TypeViolation {
        kind: EdgeType,
        src: NodeKind,
        dst: NodeKind,
    },
    #[error("duplicate {kind:?} edge {src} -> {dst}")]
    DuplicateEdge {
        src: NodeId,
        dst: NodeId,
        kind: EdgeType,
    },
    #[error("self-loop on {0}")]
    SelfLoop(NodeId),
    #[error("node {id} is {found:?}, expected {expected:?}")]
    WrongKind {
        id: NodeId,
        expected: NodeKind,
        found: NodeKind,
    },
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("graph dimensions must be positive (k = {k}, n_max = {n_max})")]
    InvalidShape { k: usize, n_max: usize },
}

pub type GraphResult<T> = Result<T, GraphError>;

fn check_unit_interval(value: f64) -> bool {
    value > 0.0 && value <= 1.0
}

/// The epistemic state graph `S = (V, E, ℓ, c, w)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphDocument", into = "GraphDocument")]
pub struct EpistemicStateGraph {
    k: usize,
    n_max: usize,
    nodes: BTreeMap<NodeId, Node>,
    edges: BTreeMap<(NodeId, NodeId, EdgeType), f64>,
    next_id: u64,
}

impl EpistemicStateGraph {
    pub fn new(k: usize, n_max: usize) -> GraphResult<Self> {
        if k == 0 || n_max == 0 {
            return Err(GraphError::InvalidShape { k, n_max });
        }
        Ok(Self {
            k,
            n_max,
            nodes: BTreeMap::new(),
            edges: BTreeMap::new(),
            next_id: 0,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(&id)
    }

    /// Nodes in ascending id order.
    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values()
    }

    /// Edges in ascending `(src, dst, kind)` order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().map(|(&(src, dst, kind), &weight)| Edge {
            src,
            dst,
            kind,
            weight,
        })
    }

    pub fn edge_weight(&self, src: NodeId, dst: NodeId, kind: EdgeType) -> Option<f64> {
        let (src, dst) = canonical_endpoints(src, dst, kind);
        self.edges.get(&(src, dst, kind)).copied()
    }

    pub fn nodes_of_kind(&self, kind: NodeKind) -> impl Iterator<Item = &Node> {
        self.nodes.values().filter(move |n| n.kind == kind)
    }

    fn check_attr(&self, attr: &[f64]) -> GraphResult<()> {
        if attr.len() != self.k {
            return Err(GraphError::DimensionMismatch {
                expected: self.k,
                found: attr.len(),
            });
        }
        if attr.iter().any(|v| !v.is_finite()) {
            return Err(GraphError::NonFiniteAttr);
        }
        Ok(())
    }

    /// Insert a node of any kind.
    pub fn add_node(
        &mut self,
        kind: NodeKind,
        attr: Vec<f64>,
        confidence: f64,
        provenance: impl Into<String>,
    ) -> GraphResult<NodeId> {
        if self.nodes.len() >= self.n_max {
            return Err(GraphError::CapacityExceeded { n_max: self.n_max });
        }
        if !check_unit_interval(confidence) {
            return Err(GraphError::InvalidConfidence(confidence));
        }
        self.check_attr(&attr)?;
        let id = NodeId(self.next_id);
        self.next_id += 1;
        self.nodes.insert(
            id,
            Node {
                id,
                kind,
                attr,
                confidence,
                provenance: provenance.into(),
            },
        );
        Ok(id)
    }

    pub fn add_claim(
        &mut self,
        attr: Vec<f64>,
        confidence: f64,
        provenance: impl Into<String>,
    ) -> GraphResult<NodeId> {
        self.add_node(NodeKind::Claim, attr, confidence, provenance)
    }

    pub fn add_partial_answer(
        &mut self,
        attr: Vec<f64>,
        confidence: f64,
        provenance: impl Into<String>,
    ) -> GraphResult<NodeId> {
        self.add_node(NodeKind::PartialAnswer, attr, confidence, provenance)
    }

    pub fn add_open_question(
        &mut self,
        attr: Vec<f64>,
        confidence: f64,
        provenance: impl Into<String>,
    ) -> GraphResult<NodeId> {
        self.add_node(NodeKind::OpenQuestion, attr, confidence, provenance)
    }

    fn kind_of(&self, id: NodeId) -> GraphResult<NodeKind> {
        self.nodes
            .get(&id)
            .map(|n| n.kind)
            .ok_or(GraphError::UnknownNode(id))
    }

    pub fn add_edge(&mut self, src: NodeId, dst: NodeId, kind: EdgeType, weight: f64) -> GraphResult<()> {
        let src_kind = self.kind_of(src)?;
        let dst_kind = self.kind_of(dst)?;
        if src == dst {
            return Err(GraphError::SelfLoop(src));
        }
        if !kind.allows(src_kind, dst_kind) {
            return Err(GraphError::TypeViolation {
                kind,
                src: src_kind,
                dst: dst_kind,
            });
        }
        if !check_unit_interval(weight) {
            return Err(GraphError::InvalidWeight(weight));
        }
        let (src, dst) = canonical_endpoints(src, dst, kind);
        if self.edges.contains_key(&(src, dst, kind)) {
            return Err(GraphError::DuplicateEdge { src, dst, kind });
        }
        self.edges.insert((src, dst, kind), weight);
        Ok(())
    }

    /// Turn an OpenQuestion into a PartialAnswer carrying `attr` and
    /// `confidence`. Incoming `Requires` edges are kept.
    pub fn promote_open_question(&mut self, q: NodeId, attr: Vec<f64>, confidence: f64) -> GraphResult<()> {
        let found = self.kind_of(q)?;
        if found != NodeKind::OpenQuestion {
            return Err(GraphError::WrongKind {
                id: q,
                expected: NodeKind::OpenQuestion,
                found,
            });
        }
        if !check_unit_interval(confidence) {
            return Err(GraphError::InvalidConfidence(confidence));
        }
        self.check_attr(&attr)?;
        let node = self.nodes.get_mut(&q).expect("checked above");
        node.kind = NodeKind::PartialAnswer;
        node.attr = attr;
        node.confidence = confidence;
        Ok(())
    }

    /// Remove a node and every edge touching it.
    pub fn remove_node(&mut self, id: NodeId) -> GraphResult<Node> {
        let node = self.nodes.remove(&id).ok_or(GraphError::UnknownNode(id))?;
        self.edges.retain(|&(s, d, _), _| s != id && d != id);
        Ok(node)
    }

    /// True iff no `Contradicts` edge joins two nodes whose confidences both
    /// exceed `delta`.
    pub fn is_consistent(&self, delta: f64) -> bool {
        self.contradiction_pairs().into_iter().all(|(a, b, _)| {
            let ca = self.nodes[&a].confidence;
            let cb = self.nodes[&b].confidence;
            !(ca > delta && cb > delta)
        })
    }

    /// All `Contradicts` edges, sorted by `(src, dst)`.
    pub fn contradiction_pairs(&self) -> Vec<(NodeId, NodeId, f64)> {
        self.edges
            .iter()
            .filter(|(&(_, _, kind), _)| kind == EdgeType::Contradicts)
            .map(|(&(s, d, _), &w)| (s, d, w))
            .collect()
    }

    /// Insert a node with a caller-chosen id. Callers guarantee validity.
    pub(crate) fn insert_raw_node(&mut self, node: Node) {
        self.next_id = self.next_id.max(node.id.0 + 1);
        self.nodes.insert(node.id, node);
    }

    /// Insert an edge without typing checks, keeping the larger weight on
    /// collision.
    pub(crate) fn upsert_raw_edge(&mut self, edge: Edge) {
        let (src, dst) = canonical_endpoints(edge.src, edge.dst, edge.kind);
        let slot = self.edges.entry((src, dst, edge.kind)).or_insert(edge.weight);
        *slot = slot.max(edge.weight);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serialisation is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

fn canonical_endpoints(src: NodeId, dst: NodeId, kind: EdgeType) -> (NodeId, NodeId) {
    if kind == EdgeType::Contradicts && src > dst {
        (dst, src)
    } else {
        (src, dst)
    }
}

/// Flat JSON form of a graph. Nodes and edges are emitted sorted by id.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub k: usize,
    pub n_max: usize,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

impl From<EpistemicStateGraph> for GraphDocument {
    fn from(graph: EpistemicStateGraph) -> Self {
        let edges = graph.edges().collect();
        GraphDocument {
            k: graph.k,
            n_max: graph.n_max,
            nodes: graph.nodes.into_values().collect(),
            edges,
        }
    }
}

impl TryFrom<GraphDocument> for EpistemicStateGraph {
    type Error = GraphError;

    fn try_from(doc: GraphDocument) -> GraphResult<Self> {
        let mut graph = EpistemicStateGraph::new(doc.k, doc.n_max)?;
        if doc.nodes.len() > doc.n_max {
            return Err(GraphError::CapacityExceeded { n_max: doc.n_max });
        }
        for node in doc.nodes {
            if graph.nodes.contains_key(&node.id) {
                return Err(GraphError::DuplicateNode(node.id));
            }
            if !check_unit_interval(node.confidence) {
                return Err(GraphError::InvalidConfidence(node.confidence));
            }
            graph.check_attr(&node.attr)?;
            graph.next_id = graph.next_id.max(node.id.0 + 1);
            graph.nodes.insert(node.id, node);
        }
        for edge in doc.edges {
            let src_kind = graph.kind_of(edge.src)?;
            let dst_kind = graph.kind_of(edge.dst)?;
            if edge.src == edge.dst {
                return Err(GraphError::SelfLoop(edge.src));
            }
            if !edge.kind.allows_stored(src_kind, dst_kind) {
                return Err(GraphError::TypeViolation {
                    kind: edge.kind,
                    src: src_kind,
                    dst: dst_kind,
                });
            }
            if !check_unit_interval(edge.weight) {
                return Err(GraphError::InvalidWeight(edge.weight));
            }
            let (src, dst) = canonical_endpoints(edge.src, edge.dst, edge.kind);
            if graph.edges.insert((src, dst, edge.kind), edge.weight).is_some() {
                return Err(GraphError::DuplicateEdge {
                    src,
                    dst,
                    kind: edge.kind,
                });
            }
        }
        Ok(graph)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph() -> EpistemicStateGraph {
        EpistemicStateGraph::new(2, 8).unwrap()
    }

    #[test]
    fn first_claim_insertion() {
        let mut g = graph();
        let id = g.add_claim(vec![0.5, 0.5], 1.0, "doc").unwrap();
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.node(id).unwrap().kind, NodeKind::Claim);
    }

    #[test]
    fn capacity_boundary() {
        let mut g = EpistemicStateGraph::new(1, 2).unwrap();
        g.add_claim(vec![0.0], 0.5, "a").unwrap();
        g.add_claim(vec![1.0], 0.5, "b").unwrap();
        assert_eq!(
            g.add_claim(vec![2.0], 0.5, "c"),
            Err(GraphError::CapacityExceeded { n_max: 2 })
        );
    }

    #[test]
    fn counts_claims() {
        let mut g = graph();
        for i in 0..3 {
            g.add_claim(vec![i as f64, 0.0], 0.7, "x").unwrap();
        }
        assert_eq!(g.node_count(), 3);
    }

    #[test]
    fn rejects_bad_confidence_and_dimension() {
        let mut g = graph();
        assert_eq!(
            g.add_claim(vec![0.0, 0.0], 0.0, "x"),
            Err(GraphError::InvalidConfidence(0.0))
        );
        assert_eq!(
            g.add_claim(vec![0.0, 0.0], 1.5, "x"),
            Err(GraphError::InvalidConfidence(1.5))
        );
        assert_eq!(
            g.add_claim(vec![0.0], 0.5, "x"),
            Err(GraphError::DimensionMismatch { expected: 2, found: 1 })
        );
    }

    #[test]
    fn edge_typing_rules() {
        let mut g = graph();
        let c = g.add_claim(vec![0.0, 0.0], 0.9, "x").unwrap();
        let a = g.add_partial_answer(vec![1.0, 0.0], 0.5, "x").unwrap();
        let q = g.add_open_question(vec![0.0, 1.0], 0.3, "x").unwrap();

        g.add_edge(c, a, EdgeType::Supports, 0.8).unwrap();
        assert!(matches!(
            g.add_edge(c, q, EdgeType::Contradicts, 0.5),
            Err(GraphError::TypeViolation { .. })
        ));
        assert!(matches!(
            g.add_edge(c, a, EdgeType::Contradicts, 0.5),
            Err(GraphError::TypeViolation { .. })
        ));
        g.add_edge(a, q, EdgeType::Requires, 1.0).unwrap();
        assert!(matches!(
            g.add_edge(a, q, EdgeType::Requires, 0.5),
            Err(GraphError::DuplicateEdge { .. })
        ));
        assert_eq!(
            g.add_edge(c, NodeId(99), EdgeType::Supports, 0.5),
            Err(GraphError::UnknownNode(NodeId(99)))
        );
        assert_eq!(g.add_edge(c, c, EdgeType::Supports, 0.5), Err(GraphError::SelfLoop(c)));
        assert_eq!(
            g.add_edge(c, a, EdgeType::Requires, 0.5),
            Err(GraphError::TypeViolation {
                kind: EdgeType::Requires,
                src: NodeKind::Claim,
                dst: NodeKind::PartialAnswer
            })
        );
    }

    #[test]
    fn contradicts_is_canonicalised() {
        let mut g = graph();
        let a = g.add_claim(vec![0.0, 0.0], 0.9, "x").unwrap();
        let b = g.add_claim(vec![1.0, 0.0], 0.9, "x").unwrap();
        g.add_edge(b, a, EdgeType::Contradicts, 0.7).unwrap();
        assert_eq!(g.contradiction_pairs(), vec![(a, b, 0.7)]);
        assert!(matches!(
            g.add_edge(a, b, EdgeType::Contradicts, 0.7),
            Err(GraphError::DuplicateEdge { .. })
        ));
    }

    #[test]
    fn promotion() {
        let mut g = graph();
        let c = g.add_claim(vec![0.0, 0.0], 0.9, "x").unwrap();
        let q = g.add_open_question(vec![0.0, 1.0], 0.3, "x").unwrap();
        g.add_edge(c, q, EdgeType::Requires, 0.6).unwrap();
        let before = g.node_count();

        g.promote_open_question(q, vec![0.2, 0.2], 0.3).unwrap();
        let node = g.node(q).unwrap();
        assert_eq!(node.kind, NodeKind::PartialAnswer);
        assert_eq!(node.confidence, 0.3);
        assert_eq!(g.node_count(), before);
        assert_eq!(g.edge_weight(c, q, EdgeType::Requires), Some(0.6));

        assert_eq!(
            g.promote_open_question(q, vec![0.2, 0.2], 0.3),
            Err(GraphError::WrongKind {
                id: q,
                expected: NodeKind::OpenQuestion,
                found: NodeKind::PartialAnswer
            })
        );
        assert_eq!(
            g.promote_open_question(NodeId(42), vec![0.0, 0.0], 0.5),
            Err(GraphError::UnknownNode(NodeId(42)))
        );
    }

    #[test]
    fn consistency() {
        let mut g = graph();
        assert!(g.is_consistent(0.5));
        let a = g.add_claim(vec![0.0, 0.0], 0.9, "x").unwrap();
        let b = g.add_claim(vec![1.0, 0.0], 0.9, "x").unwrap();
        let c = g.add_claim(vec![2.0, 0.0], 0.4, "x").unwrap();
        g.add_edge(a, c, EdgeType::Contradicts, 1.0).unwrap();
        assert!(g.is_consistent(0.5));
        g.add_edge(a, b, EdgeType::Contradicts, 1.0).unwrap();
        assert!(!g.is_consistent(0.5));
        assert!(g.is_consistent(0.95));
    }

    #[test]
    fn contradiction_pair_listing() {
        let mut g = graph();
        assert!(g.contradiction_pairs().is_empty());
        let ids: Vec<_> = (0..4)
            .map(|i| g.add_claim(vec![i as f64, 0.0], 0.5, "x").unwrap())
            .collect();
        g.add_edge(ids[2], ids[3], EdgeType::Contradicts, 0.3).unwrap();
        assert_eq!(g.contradiction_pairs(), vec![(ids[2], ids[3], 0.3)]);
        g.add_edge(ids[1], ids[0], EdgeType::Contradicts, 0.4).unwrap();
        assert_eq!(
            g.contradiction_pairs(),
            vec![(ids[0], ids[1], 0.4), (ids[2], ids[3], 0.3)]
        );
    }

    #[test]
    fn ids_are_not_reused() {
        let mut g = graph();
        let a = g.add_claim(vec![0.0, 0.0], 0.5, "x").unwrap();
        g.remove_node(a).unwrap();
        let b = g.add_claim(vec![0.0, 0.0], 0.5, "x").unwrap();
        assert!(b > a);
    }

    #[test]
    fn json_document_shape() {
        let mut g = EpistemicStateGraph::new(1, 4).unwrap();
        let c = g.add_claim(vec![0.25], 0.9, "src").unwrap();
        let q = g.add_open_question(vec![1.0], 0.2, "src").unwrap();
        g.add_edge(c, q, EdgeType::Requires, 0.5).unwrap();
        let value: serde_json::Value = serde_json::to_value(&g).unwrap();
        let keys: Vec<_> = value.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys.len(), 4);
        assert_eq!(value["nodes"][1]["kind"], "open_question");
        assert_eq!(value["edges"][0]["kind"], "requires");

        let back = EpistemicStateGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn json_rejects_bad_documents() {
        let bad_edge = r#"{"k":1,"n_max":2,"nodes":[
            {"id":0,"kind":"claim","attr":[0.0],"confidence":0.5,"provenance":""},
            {"id":1,"kind":"open_question","attr":[0.0],"confidence":0.5,"provenance":""}],
            "edges":[{"src":0,"dst":1,"kind":"contradicts","weight":0.5}]}"#;
        assert!(EpistemicStateGraph::from_json(bad_edge).is_err());
        let unknown_field = r#"{"k":1,"n_max":2,"nodes":[],"edges":[],"extra":1}"#;
        assert!(EpistemicStateGraph::from_json(unknown_field).is_err());
        let over_capacity = r#"{"k":1,"n_max":1,"nodes":[
            {"id":0,"kind":"claim","attr":[0.0],"confidence":0.5,"provenance":""},
            {"id":1,"kind":"claim","attr":[0.0],"confidence":0.5,"provenance":""}],"edges":[]}"#;
        assert!(EpistemicStateGraph::from_json(over_capacity).is_err());
    }

    #[test]
    fn loaded_graph_continues_id_counter() {
        let doc = r#"{"k":1,"n_max":4,"nodes":[
            {"id":5,"kind":"claim","attr":[0.0],"confidence":0.5,"provenance":""}],"edges":[]}"#;
        let mut g = EpistemicStateGraph::from_json(doc).unwrap();
        let id = g.add_claim(vec![1.0], 0.5, "").unwrap();
        assert_eq!(id, NodeId(6));
    }
}
