//! Oracles and generators shared by the integration suites.
#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use ordergap::embedding::{decode, embed, EmbeddingConfig, DEFAULT_PRESENCE_EPS};
use ordergap::graph::{EdgeType, EpistemicStateGraph, NodeId, NodeKind};
use ordergap::operators::{AffineEvidence, AffinePair, EvidenceDistribution};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

/// Worked-example trace at three decimals: `(t, c, u, Ω, Ω̂)`.
pub const WORKED_EXAMPLE: [(usize, f64, f64, f64, Option<f64>); 5] = [
    (1, 0.240, 0.547, 0.029, None),
    (2, 0.506, 0.243, 0.131, Some(0.080)),
    (3, 0.704, 0.065, 0.043, Some(0.087)),
    (4, 0.718, 0.016, 0.001, Some(0.022)),
    (5, 0.732, 0.004, 0.000, Some(0.001)),
];

/// Half-to-even at three decimals, computed through decimal strings so it
/// shares no code with the library's rounding.
pub fn round3_oracle(x: f64) -> f64 {
    let s = format!("{:.12}", x.abs());
    let (int, frac) = s.split_once('.').unwrap();
    let keep: u64 = format!("{int}{}", &frac[..3]).parse().unwrap();
    let rest = &frac[3..];
    let half = format!("5{}", "0".repeat(rest.len() - 1));
    let up = match rest.cmp(half.as_str()) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => keep % 2 == 1,
    };
    let v = (keep + up as u64) as f64 / 1000.0;
    if x < 0.0 && v != 0.0 {
        -v
    } else {
        v
    }
}

/// Random graph within capacity with sparse ids and well-typed edges.
pub fn random_graph(rng: &mut ChaCha8Rng) -> EpistemicStateGraph {
    let k = rng.gen_range(1..=3);
    let n_max = rng.gen_range(1..=8);
    let mut g = EpistemicStateGraph::new(k, n_max).unwrap();
    let kinds = [NodeKind::Claim, NodeKind::PartialAnswer, NodeKind::OpenQuestion];
    // Add and drop a few scratch nodes so ids are not contiguous.
    let scratch = rng.gen_range(0..=n_max.min(3));
    let mut dropped = Vec::new();
    for _ in 0..scratch {
        dropped.push(g.add_claim(vec![0.0; k], 0.5, "scratch").unwrap());
    }
    for id in dropped {
        g.remove_node(id).unwrap();
    }
    let count = rng.gen_range(0..=n_max);
    for i in 0..count {
        let kind = *kinds.choose(rng).unwrap();
        let attr: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let confidence = rng.gen_range(0.01..=1.0);
        g.add_node(kind, attr, confidence, format!("src-{i}")).unwrap();
    }
    let ids: Vec<NodeId> = g.nodes().map(|n| n.id).collect();
    if ids.len() >= 2 {
        for _ in 0..rng.gen_range(0..=2 * ids.len()) {
            let src = *ids.choose(rng).unwrap();
            let dst = *ids.choose(rng).unwrap();
            let kind = EdgeType::ALL[rng.gen_range(0..3)];
            let weight = rng.gen_range(0.01..=1.0);
            let _ = g.add_edge(src, dst, kind, weight);
        }
    }
    g
}

/// Compare `decoded` with `original` under the relabelling that sends the
/// i-th node in (kind, id) order to id `i`. Provenance is not embedded.
pub fn equal_up_to_relabelling(original: &EpistemicStateGraph, decoded: &EpistemicStateGraph) -> Result<(), String> {
    let mut order: Vec<_> = original.nodes().collect();
    order.sort_by_key(|n| (n.kind as u8, n.id.0));
    let relabel = |id: NodeId| NodeId(order.iter().position(|n| n.id == id).unwrap() as u64);
    if decoded.node_count() != original.node_count() {
        return Err(format!("{} nodes decoded, {} expected", decoded.node_count(), original.node_count()));
    }
    for n in original.nodes() {
        let d = decoded.node(relabel(n.id)).ok_or_else(|| format!("node {} missing", n.id))?;
        if d.kind != n.kind || d.attr != n.attr || d.confidence != n.confidence {
            return Err(format!("node {} differs: {:?} vs {:?}", n.id, d, n));
        }
    }
    if decoded.edge_count() != original.edge_count() {
        return Err(format!("{} edges decoded, {} expected", decoded.edge_count(), original.edge_count()));
    }
    for e in original.edges() {
        let w = decoded.edge_weight(relabel(e.src), relabel(e.dst), e.kind);
        if w != Some(e.weight) {
            return Err(format!("edge {:?} decoded as {:?}", e, w));
        }
    }
    Ok(())
}

pub fn roundtrip(graph: &EpistemicStateGraph) -> Result<(), String> {
    let config = EmbeddingConfig::for_graph(graph);
    let state = embed(graph, &config).map_err(|e| e.to_string())?;
    equal_up_to_relabelling(graph, &decode(&state, DEFAULT_PRESENCE_EPS))
}

fn random_orthogonal(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let m = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
    m.qr().q()
}

/// A finite-support affine instance: `Q = θ* + A(θ − θ*)`,
/// `P_e = θ* + B_e(θ − θ*)`, so `P_e(θ*) = θ*` and the Jacobians are `A` and
/// `B_e`. With `planted > 0` the first `planted` columns of a random
/// orthogonal `U` are common eigenvectors of `A` and every `B_e`, hence lie
/// in every commutator kernel.
pub struct AffineInstance {
    pub pair: AffinePair,
    pub dist: EvidenceDistribution<AffineEvidence>,
    pub anchor: DVector<f64>,
    pub a: DMatrix<f64>,
    pub bs: Vec<DMatrix<f64>>,
    pub planted: DMatrix<f64>,
}

pub fn affine_instance(d: usize, items: usize, planted: usize, rng: &mut ChaCha8Rng) -> AffineInstance {
    let u = random_orthogonal(d, rng);
    let block = |rng: &mut ChaCha8Rng, scale: f64| {
        let mut m = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-scale..scale));
        for i in 0..planted {
            for j in 0..d {
                if i != j {
                    m[(i, j)] = 0.0;
                    m[(j, i)] = 0.0;
                }
            }
        }
        &u * m * u.transpose()
    };
    let a = block(rng, 0.3);
    let bs: Vec<DMatrix<f64>> = (0..items).map(|_| block(rng, 1.0)).collect();
    let anchor = DVector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
    let pair = AffinePair::new(anchor.clone(), a.clone()).unwrap();
    let evidence: Vec<(AffineEvidence, f64)> = bs
        .iter()
        .enumerate()
        .map(|(i, b)| {
            (
                AffineEvidence {
                    id: format!("e{i}"),
                    map: b.clone(),
                },
                rng.gen_range(0.1..1.0),
            )
        })
        .collect();
    AffineInstance {
        pair,
        dist: EvidenceDistribution::new(evidence).unwrap(),
        anchor,
        a,
        bs,
        planted: u.columns(0, planted).into_owned(),
    }
}

/// Exact commutators `A B_i − B_i A` of an affine instance.
pub fn exact_commutators(inst: &AffineInstance) -> Vec<DMatrix<f64>> {
    inst.bs.iter().map(|b| &inst.a * b - b * &inst.a).collect()
}

/// `Σ_i p_i ‖Σ_i v‖²`, one term at a time.
pub fn energy_oracle(sigmas: &[DMatrix<f64>], probs: &[f64], v: &DVector<f64>) -> f64 {
    sigmas.iter().zip(probs).map(|(s, p)| p * (s * v).norm_squared()).sum()
}
