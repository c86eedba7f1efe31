use std::fs;
use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{HarnessError, HarnessResult};
use crate::embedding::{embed_with_layout, EmbeddingConfig, SlotLayout};
use crate::graph::{EpistemicStateGraph, NodeId, DEFAULT_DELTA};
use crate::operators::{
    coverage_reweight, ConsolidationParams, Evidence, EvidenceDistribution, EvidenceScript, EvidenceSource, GraphOperators,
    OperatorPair, Relevance, ScalarPair, ScalarState2D, DEFAULT_DEDUP_EPS, DEFAULT_MERGE_EPS,
};
use crate::spectral::{SpectralOptions, DEFAULT_COVERAGE_TOL, DEFAULT_EIGEN_REL_TOL, DEFAULT_REDUNDANCY_TOL, DEFAULT_STEP, DEFAULT_SVD_REL_TOL};
use crate::termination::LoopConfig;

pub const SCENARIO_VERSION: u32 = 1;

/// A scenario file as written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub version: u32,
    pub name: String,
    pub system: SystemSpec,
    pub evidence: EvidenceSection,
    #[serde(rename = "loop")]
    pub loop_config: LoopConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    /// The closed-form `(c, u)` system.
    Scalar2d { rho: f64, initial: [f64; 2] },
    /// Graph operators on the embedding of `initial`.
    Graph {
        rho: f64,
        #[serde(default = "default_delta")]
        delta: f64,
        #[serde(default = "default_merge_eps")]
        merge_eps: f64,
        #[serde(default = "default_dedup_eps")]
        dedup_eps: f64,
        initial: EpistemicStateGraph,
    },
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

fn default_merge_eps() -> f64 {
    DEFAULT_MERGE_EPS
}

fn default_dedup_eps() -> f64 {
    DEFAULT_DEDUP_EPS
}

/// Exactly one of a fixed script or a distribution. Items are typed by the
/// system: `{id, alpha}` for `scalar2d`, structured evidence for `graph`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum EvidenceSection {
    Script(Vec<Value>),
    Distribution {
        evidence: Vec<Value>,
        weights: Vec<f64>,
        #[serde(default)]
        reweight: Reweight,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reweight {
    #[default]
    None,
    /// Favour evidence resolving questions still open.
    Coverage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumStart {
    Initial,
    /// The state the order-gap loop stops at.
    #[default]
    Final,
}

/// A user-supplied subspace, given by spanning vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedBasis {
    pub name: String,
    pub vectors: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumSpec {
    pub start: SpectrumStart,
    /// Fixed-point residual tolerance.
    pub tol: f64,
    pub max_iter: usize,
    pub step: f64,
    pub redundancy_tol: f64,
    pub eigen_rel_tol: f64,
    pub svd_rel_tol: f64,
    pub coverage_tol: f64,
    pub subspaces: Vec<NamedBasis>,
}

impl Default for SpectrumSpec {
    fn default() -> Self {
        Self {
            start: SpectrumStart::Final,
            tol: 1e-12,
            max_iter: 10_000,
            step: DEFAULT_STEP,
            redundancy_tol: DEFAULT_REDUNDANCY_TOL,
            eigen_rel_tol: DEFAULT_EIGEN_REL_TOL,
            svd_rel_tol: DEFAULT_SVD_REL_TOL,
            coverage_tol: DEFAULT_COVERAGE_TOL,
            subspaces: Vec::new(),
        }
    }
}

impl SpectrumSpec {
    pub fn options(&self) -> SpectralOptions {
        SpectralOptions {
            step: self.step,
            redundancy_tol: self.redundancy_tol,
            eigen_rel_tol: self.eigen_rel_tol,
            svd_rel_tol: self.svd_rel_tol,
            coverage_tol: self.coverage_tol,
        }
    }

    fn validate(&self) -> HarnessResult<()> {
        let positive = [
            ("tol", self.tol),
            ("step", self.step),
            ("redundancy_tol", self.redundancy_tol),
            ("eigen_rel_tol", self.eigen_rel_tol),
            ("svd_rel_tol", self.svd_rel_tol),
            ("coverage_tol", self.coverage_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(HarnessError::Validation(format!("spectrum.{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Scalar2d,
    Graph,
}

/// Evidence ready to drive a loop.
pub enum EvidenceSet<E> {
    Script(EvidenceScript<E>),
    Distribution(EvidenceDistribution<E>),
}

impl<E: Clone> EvidenceSet<E> {
    pub fn source(&self) -> &dyn EvidenceSource<E> {
        match self {
            Self::Script(s) => s,
            Self::Distribution(d) => d,
        }
    }

    pub fn distribution(&self) -> Option<&EvidenceDistribution<E>> {
        match self {
            Self::Script(_) => None,
            Self::Distribution(d) => Some(d),
        }
    }
}

pub struct SystemRun<P: OperatorPair> {
    pub pair: P,
    pub theta0: DVector<f64>,
    pub evidence: EvidenceSet<P::Evidence>,
}

pub enum LoadedSystem {
    Scalar2d(SystemRun<ScalarPair>),
    Graph {
        run: SystemRun<GraphOperators>,
        /// Node id of the initial graph held in each slot, if any.
        slot_ids: Vec<Option<NodeId>>,
    },
}

/// A validated scenario with operators and evidence built.
pub struct LoadedScenario {
    pub name: String,
    pub loop_config: LoopConfig,
    pub spectrum: SpectrumSpec,
    pub system: LoadedSystem,
}

impl LoadedScenario {
    pub fn kind(&self) -> SystemKind {
        match self.system {
            LoadedSystem::Scalar2d(_) => SystemKind::Scalar2d,
            LoadedSystem::Graph { .. } => SystemKind::Graph,
        }
    }

    pub fn theta0(&self) -> &DVector<f64> {
        match &self.system {
            LoadedSystem::Scalar2d(run) => &run.theta0,
            LoadedSystem::Graph { run, .. } => &run.theta0,
        }
    }

    /// Column names for state coordinates.
    pub fn coordinates(&self) -> Vec<String> {
        match self.kind() {
            SystemKind::Scalar2d => vec!["c".into(), "u".into()],
            SystemKind::Graph => (0..self.theta0().len()).map(|i| format!("theta_{i}")).collect(),
        }
    }

    pub fn has_distribution(&self) -> bool {
        match &self.system {
            LoadedSystem::Scalar2d(run) => run.evidence.distribution().is_some(),
            LoadedSystem::Graph { run, .. } => run.evidence.distribution().is_some(),
        }
    }

    pub fn load(path: &Path) -> HarnessResult<Self> {
        Scenario::load(path)?.validate()
    }
}

fn invalid(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Validation(e.to_string())
}

impl Scenario {
    /// Parse a scenario document. `origin` labels parse errors.
    pub fn from_json_str(text: &str, origin: &Path) -> HarnessResult<Self> {
        serde_json::from_str(text).map_err(|e| HarnessError::Parse {
            path: origin.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> HarnessResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json_str(&text, path)
    }

    /// Check parameter ranges and build operators, initial state and
    /// evidence.
    pub fn validate(&self) -> HarnessResult<LoadedScenario> {
        if self.version != SCENARIO_VERSION {
            return Err(HarnessError::Validation(format!(
                "unsupported version {} (expected {SCENARIO_VERSION})",
                self.version
            )));
        }
        self.loop_config.validate().map_err(invalid)?;
        let spectrum = self.spectrum.clone().unwrap_or_default();
        spectrum.validate()?;
        let system = match &self.system {
            SystemSpec::Scalar2d { rho, initial } => {
                let pair = ScalarPair::new(*rho).map_err(invalid)?;
                let theta0 = ScalarState2D::new(initial[0], initial[1]).map_err(invalid)?.to_vector();
                if self.reweight() == Reweight::Coverage {
                    return Err(HarnessError::Validation("coverage reweighting needs a graph system".into()));
                }
                let evidence = self.evidence_set(|i, v| {
                    let r: Relevance = serde_json::from_value(v.clone()).map_err(|e| item_error(i, e))?;
                    Relevance::new(r.id, r.alpha).map_err(|e| item_error(i, e))
                })?;
                LoadedSystem::Scalar2d(SystemRun { pair, theta0, evidence })
            }
            SystemSpec::Graph {
                rho,
                delta,
                merge_eps,
                dedup_eps,
                initial,
            } => {
                let config = EmbeddingConfig::for_graph(initial);
                let params = ConsolidationParams {
                    delta: *delta,
                    merge_eps: *merge_eps,
                    ..ConsolidationParams::new(*rho)
                };
                if !(*dedup_eps >= 0.0 && dedup_eps.is_finite()) {
                    return Err(HarnessError::Validation(format!("dedup_eps {dedup_eps}")));
                }
                let pair = GraphOperators::new(config, params).map_err(invalid)?.with_dedup_eps(*dedup_eps);
                let layout = SlotLayout::canonical(initial);
                let theta0 = embed_with_layout(initial, &config, &layout)
                    .map_err(invalid)?
                    .into_vector();
                let mut slot_ids = vec![None; config.n_max];
                for node in initial.nodes() {
                    if let Some(s) = layout.slot(node.id) {
                        slot_ids[s] = Some(node.id);
                    }
                }
                let mut evidence = self.evidence_set(|i, v| {
                    let e: Evidence = serde_json::from_value(v.clone()).map_err(|e| item_error(i, e))?;
                    to_slots(e, &layout).map_err(|m| item_error(i, m))
                })?;
                if self.reweight() == Reweight::Coverage {
                    if let EvidenceSet::Distribution(d) = evidence {
                        evidence = EvidenceSet::Distribution(d.with_reweight(coverage_reweight(config)));
                    }
                }
                LoadedSystem::Graph {
                    run: SystemRun { pair, theta0, evidence },
                    slot_ids,
                }
            }
        };
        Ok(LoadedScenario {
            name: self.name.clone(),
            loop_config: self.loop_config,
            spectrum,
            system,
        })
    }

    fn reweight(&self) -> Reweight {
        match &self.evidence {
            EvidenceSection::Script(_) => Reweight::None,
            EvidenceSection::Distribution { reweight, .. } => *reweight,
        }
    }

    fn evidence_set<E, F>(&self, parse: F) -> HarnessResult<EvidenceSet<E>>
    where
        F: Fn(usize, &Value) -> HarnessResult<E>,
    {
        match &self.evidence {
            EvidenceSection::Script(items) => {
                let items = items.iter().enumerate().map(|(i, v)| parse(i, v)).collect::<HarnessResult<_>>()?;
                Ok(EvidenceSet::Script(EvidenceScript::new(items)))
            }
            EvidenceSection::Distribution { evidence, weights, .. } => {
                if evidence.len() != weights.len() {
                    return Err(HarnessError::Validation(format!(
                        "{} evidence items but {} weights",
                        evidence.len(),
                        weights.len()
                    )));
                }
                if evidence.is_empty() {
                    return Err(HarnessError::Validation("distribution has no evidence items".into()));
                }
                let items = evidence
                    .iter()
                    .enumerate()
                    .map(|(i, v)| parse(i, v))
                    .zip(weights.iter().copied())
                    .map(|(e, w)| e.map(|e| (e, w)))
                    .collect::<HarnessResult<Vec<_>>>()?;
                Ok(EvidenceSet::Distribution(EvidenceDistribution::new(items)?))
            }
        }
    }
}

fn item_error(index: usize, err: impl std::fmt::Display) -> HarnessError {
    HarnessError::Validation(format!("evidence item {index}: {err}"))
}

/// Rewrite node references from graph ids to embedding slots.
fn to_slots(mut e: Evidence, layout: &SlotLayout) -> Result<Evidence, String> {
    let slot = |id: NodeId| {
        layout
            .slot(id)
            .map(|s| NodeId(s as u64))
            .ok_or_else(|| format!("unknown node {id}"))
    };
    for link in &mut e.links {
        link.target = slot(link.target)?;
    }
    for res in &mut e.resolves {
        res.question = slot(res.question)?;
    }
    Ok(e)
}
