use nalgebra::DVector;
use serde::Serialize;

use super::{Gramian, SpectralError, SpectralResult};
use crate::embedding::{embed_with_layout, EmbeddedState, EmbeddingConfig, SlotLayout};
use crate::graph::{EpistemicStateGraph, NodeId, NodeKind};

/// One row of the per-question coverage table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageEntry {
    pub question: NodeId,
    pub covered: bool,
    /// Support items with `‖Σ_e v_q‖ > tol`.
    pub supporting: Vec<String>,
    /// `‖Σ_e v_q‖` for every support item, in support order.
    pub response: Vec<(String, f64)>,
}

/// `φ(S^(q)) − φ(S)` for the open question held in slot `q` of an embedded
/// state, promoting in place: attributes, confidence and edges are kept, so
/// only the two kind flags of the slot change.
pub fn resolution_direction(state: &EmbeddedState, q: NodeId, presence_eps: f64) -> SpectralResult<DVector<f64>> {
    let cfg = *state.config();
    let slot = q.0 as usize;
    if slot >= cfg.n_max || !state.is_present(slot, presence_eps) {
        return Err(SpectralError::UnknownNode(q));
    }
    let found = state.kind(slot);
    if found != NodeKind::OpenQuestion {
        return Err(SpectralError::WrongKind { id: q, found });
    }
    let mut promoted = state.clone();
    promoted.set_kind(slot, NodeKind::PartialAnswer);
    Ok(promoted.into_vector() - state.theta())
}

/// `φ(S^(q)) − φ(S)` with `S^(q)` the graph after promoting `q` to a partial
/// answer carrying `attr` and `confidence`. Both states use the canonical
/// slot layout of `S`.
pub fn resolution_direction_for_graph(
    graph: &EpistemicStateGraph,
    q: NodeId,
    attr: Vec<f64>,
    confidence: f64,
    config: &EmbeddingConfig,
) -> SpectralResult<DVector<f64>> {
    let node = graph.node(q).ok_or(SpectralError::UnknownNode(q))?;
    if node.kind != NodeKind::OpenQuestion {
        return Err(SpectralError::WrongKind { id: q, found: node.kind });
    }
    let layout = SlotLayout::canonical(graph);
    let before = embed_with_layout(graph, config, &layout)?;
    let mut resolved = graph.clone();
    resolved
        .promote_open_question(q, attr, confidence)
        .map_err(|_| SpectralError::WrongKind { id: q, found: node.kind })?;
    let after = embed_with_layout(&resolved, config, &layout)?;
    let v = after.into_vector() - before.theta();
    if v.iter().all(|&x| x == 0.0) {
        return Err(SpectralError::ZeroDirection(q));
    }
    Ok(v)
}

/// Whether some support item of `g` moves `v_q` through its commutator.
pub fn coverage_check(g: &Gramian, question: NodeId, v_q: &DVector<f64>, tol: f64) -> SpectralResult<CoverageEntry> {
    if v_q.len() != g.dim() {
        return Err(SpectralError::Dimension {
            expected: g.dim(),
            found: v_q.len(),
        });
    }
    if v_q.iter().all(|&x| x == 0.0) {
        return Err(SpectralError::ZeroDirection(question));
    }
    let response: Vec<(String, f64)> = g
        .commutators
        .iter()
        .map(|c| (c.evidence_id.clone(), c.apply(v_q).norm()))
        .collect();
    let supporting: Vec<String> = response
        .iter()
        .filter(|(_, n)| *n > tol)
        .map(|(id, _)| id.clone())
        .collect();
    Ok(CoverageEntry {
        question,
        covered: !supporting.is_empty(),
        supporting,
        response,
    })
}

/// Coverage of every open question present in `θ*`, in slot order.
pub fn coverage_table(theta_star: &EmbeddedState, g: &Gramian, tol: f64, presence_eps: f64) -> SpectralResult<Vec<CoverageEntry>> {
    theta_star
        .occupied_slots(presence_eps)
        .into_iter()
        .filter(|&s| theta_star.kind(s) == NodeKind::OpenQuestion)
        .map(|s| {
            let q = NodeId(s as u64);
            let v = resolution_direction(theta_star, q, presence_eps)?;
            coverage_check(g, q, &v, tol)
        })
        .collect()
}
