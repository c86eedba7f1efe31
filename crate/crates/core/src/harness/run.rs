use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DVector;
use serde::Serialize;

use super::report::{stop_reason_name, write_spectrum};
use super::{
    CompareReport, HarnessError, HarnessResult, LoadedScenario, LoadedSystem, PolicyRow, RunReport, SpectrumStart, SystemRun,
};
use crate::embedding::{decode, EmbeddedState};
use crate::graph::NodeId;
use crate::operators::{EvidenceItem, GraphOperators, OperatorPair};
use crate::spectral::{
    coverage_table, find_fixed_point, gramian, jacobian_step_sweep, kernel_intersection_oracle, nondegeneracy_check, resolution_direction,
    Gramian, KernelVerdict, NondegeneracyVerdict, SpectralError, Subspace,
};
use crate::termination::{fixed_budget_loop, run_loop, LoopConfig, LoopOutcome};

fn drive<P: OperatorPair>(run: &SystemRun<P>, config: &LoopConfig, budget: Option<usize>) -> HarnessResult<LoopOutcome> {
    let source = run.evidence.source();
    Ok(match budget {
        None => run_loop(&run.pair, source, &run.theta0, config)?,
        Some(b) => fixed_budget_loop(&run.pair, source, &run.theta0, b, config)?,
    })
}

fn outcome(scn: &LoadedScenario, budget: Option<usize>) -> HarnessResult<LoopOutcome> {
    match &scn.system {
        LoadedSystem::Scalar2d(run) => drive(run, &scn.loop_config, budget),
        LoadedSystem::Graph { run, .. } => drive(run, &scn.loop_config, budget),
    }
}

/// Run the order-gap loop of a loaded scenario.
pub fn execute(scn: &LoadedScenario) -> HarnessResult<RunReport> {
    let out = outcome(scn, None)?;
    let final_graph = match &scn.system {
        LoadedSystem::Graph { run, .. } => {
            let state = EmbeddedState::from_vector(*run.pair.config(), out.final_state.clone())
                .map_err(SpectralError::from)?;
            Some(decode(&state, run.pair.params().presence_eps))
        }
        LoadedSystem::Scalar2d(_) => None,
    };
    Ok(RunReport {
        name: scn.name.clone(),
        system: scn.kind(),
        coordinates: scn.coordinates(),
        loop_config: scn.loop_config,
        final_state: out.final_state.as_slice().to_vec(),
        trace: out.trace,
        final_graph,
    })
}

/// Load, run and write `trace.csv`, `report.json` and `summary.txt`.
pub fn run_scenario(path: &Path, out: &Path) -> HarnessResult<RunReport> {
    let report = execute(&LoadedScenario::load(path)?)?;
    report.write(out)?;
    Ok(report)
}

fn policy_row(policy: String, budget: Option<usize>, out: &LoopOutcome, reference: &DVector<f64>) -> PolicyRow {
    let delta = &out.final_state - reference;
    PolicyRow {
        policy,
        budget,
        steps: out.steps(),
        stop_reason: stop_reason_name(out.trace.stop_reason).to_string(),
        final_state: out.final_state.as_slice().to_vec(),
        distance: delta.norm(),
        delta: delta.as_slice().to_vec(),
    }
}

/// The order-gap stop against fixed budgets, each measured from the
/// order-gap stop state.
pub fn compare(scn: &LoadedScenario, budgets: &[usize]) -> HarnessResult<CompareReport> {
    let stop = outcome(scn, None)?;
    let reference = stop.final_state.clone();
    let mut rows = vec![policy_row("order-gap".into(), None, &stop, &reference)];
    for &b in budgets {
        let out = outcome(scn, Some(b))?;
        rows.push(policy_row(format!("fixed-budget-{b}"), Some(b), &out, &reference));
    }
    Ok(CompareReport {
        name: scn.name.clone(),
        coordinates: scn.coordinates(),
        rows,
    })
}

/// Load, compare and write `compare.csv` and `compare.json`.
pub fn compare_policies(path: &Path, budgets: &[usize], out: &Path) -> HarnessResult<CompareReport> {
    let report = compare(&LoadedScenario::load(path)?, budgets)?;
    report.write(out)?;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumStatus {
    Complete,
    NoConvergence,
    RedundancyViolated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointEntry {
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RedundancyEntry {
    pub evidence_id: String,
    pub probability: f64,
    /// `‖P_e(θ*) − θ*‖`.
    pub norm: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommutatorEntry {
    pub evidence_id: String,
    pub probability: f64,
    pub frobenius_norm: f64,
    pub max_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GramianSummary {
    pub dim: usize,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub norm: f64,
    pub symmetry_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubspaceEntry {
    pub name: String,
    pub dim: usize,
    pub nondegeneracy: NondegeneracyVerdict,
    pub kernel: KernelVerdict,
    /// Both routes give the same verdict.
    pub agree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageRow {
    /// Node id in the scenario's initial graph.
    pub question: Option<NodeId>,
    pub slot: usize,
    pub covered: bool,
    pub supporting: Vec<String>,
    pub response: Vec<(String, f64)>,
}

/// End-to-end spectral analysis of a distribution scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub name: String,
    pub status: SpectrumStatus,
    pub start: SpectrumStart,
    pub start_state: Vec<f64>,
    pub loop_stop_step: usize,
    pub loop_stop_reason: String,
    /// `Ω̂` at the loop's last step, when the window filled.
    pub loop_final_windowed: Option<f64>,
    pub fixed_point: FixedPointEntry,
    /// Largest change in `DQ(θ*)` when the difference step is halved. Large
    /// values mean `Q` is not smooth at `θ*` and the linearisation is
    /// unreliable.
    pub consolidation_step_sweep: Option<f64>,
    pub redundancy: Vec<RedundancyEntry>,
    pub commutators: Vec<CommutatorEntry>,
    pub gramian: Option<GramianSummary>,
    pub subspaces: Vec<SubspaceEntry>,
    pub coverage: Vec<CoverageRow>,
    /// Verdict on the full space: `nondegenerate` or `degenerate`.
    pub verdict: Option<String>,
}

impl SpectrumReport {
    pub fn subspace(&self, name: &str) -> Option<&SubspaceEntry> {
        self.subspaces.iter().find(|s| s.name == name)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario {}: {:?}", self.name, self.status);
        let _ = writeln!(
            s,
            "loop stopped at step {} ({}), final windowed gap {}",
            self.loop_stop_step,
            self.loop_stop_reason,
            self.loop_final_windowed.map_or("-".into(), |w| format!("{w:e}"))
        );
        let fp = &self.fixed_point;
        let _ = writeln!(
            s,
            "fixed point: converged {} after {} iterations, residual {:e}",
            fp.converged, fp.iterations, fp.residual
        );
        if let Some(sweep) = self.consolidation_step_sweep {
            let _ = writeln!(s, "DQ step-halving change: {sweep:e}");
        }
        for r in &self.redundancy {
            let _ = writeln!(s, "  redundancy {} (p = {}): {:e} {}", r.evidence_id, r.probability, r.norm, if r.holds { "ok" } else { "VIOLATED" });
        }
        for c in &self.commutators {
            let _ = writeln!(s, "  commutator {}: ‖Σ‖_F = {:e}", c.evidence_id, c.frobenius_norm);
        }
        if let Some(g) = &self.gramian {
            let shown: Vec<String> = g.eigenvalues.iter().take(8).map(|l| format!("{l:.3e}")).collect();
            let _ = writeln!(s, "gramian: dim {}, ‖G‖ = {:e}, smallest eigenvalues [{}]", g.dim, g.norm, shown.join(", "));
        }
        for w in &self.subspaces {
            let _ = writeln!(
                s,
                "W = {} (dim {}): {}, min eigenvalue {:e}, kernel nullity {}, routes agree {}",
                w.name,
                w.dim,
                if w.nondegeneracy.positive_definite_on_w { "positive definite" } else { "degenerate" },
                w.nondegeneracy.min_eigenvalue,
                w.kernel.nullity,
                w.agree
            );
        }
        for c in &self.coverage {
            let q = c.question.map_or(format!("slot {}", c.slot), |id| id.to_string());
            let _ = writeln!(
                s,
                "coverage {}: {}{}",
                q,
                if c.covered { "covered by " } else { "UNCOVERED" },
                c.supporting.join(", ")
            );
        }
        if let Some(v) = &self.verdict {
            let _ = writeln!(s, "verdict on full space: {v}");
        }
        s
    }
}

struct Core {
    report: SpectrumReport,
    theta_star: DVector<f64>,
    gramian: Option<Gramian>,
}

fn spectral_core<P: OperatorPair>(scn: &LoadedScenario, run: &SystemRun<P>) -> HarnessResult<Core> {
    let spec = &scn.spectrum;
    let opts = spec.options();
    let dist = run
        .evidence
        .distribution()
        .ok_or_else(|| HarnessError::Validation("spectrum analysis needs an evidence distribution".into()))?;
    let looped = drive(run, &scn.loop_config, None)?;
    let start_state = match spec.start {
        SpectrumStart::Initial => run.theta0.clone(),
        SpectrumStart::Final => looped.final_state.clone(),
    };
    let mut report = SpectrumReport {
        name: scn.name.clone(),
        status: SpectrumStatus::Complete,
        start: spec.start,
        start_state: start_state.as_slice().to_vec(),
        loop_stop_step: looped.steps(),
        loop_stop_reason: stop_reason_name(looped.trace.stop_reason).to_string(),
        loop_final_windowed: looped.trace.records.last().and_then(|r| r.windowed),
        fixed_point: FixedPointEntry {
            converged: false,
            iterations: 0,
            residual: f64::NAN,
            theta: Vec::new(),
        },
        consolidation_step_sweep: None,
        redundancy: Vec::new(),
        commutators: Vec::new(),
        gramian: None,
        subspaces: Vec::new(),
        coverage: Vec::new(),
        verdict: None,
    };
    let theta_star = match find_fixed_point(|x| run.pair.consolidate(x), &start_state, spec.tol, spec.max_iter) {
        Ok(fp) => {
            report.fixed_point = FixedPointEntry {
                converged: true,
                iterations: fp.iterations,
                residual: fp.residual,
                theta: fp.theta.clone(),
            };
            fp.vector()
        }
        Err(SpectralError::NoConvergence {
            iterations,
            residual,
            theta,
        }) => {
            report.status = SpectrumStatus::NoConvergence;
            report.fixed_point = FixedPointEntry {
                converged: false,
                iterations,
                residual,
                theta: theta.clone(),
            };
            return Ok(Core {
                report,
                theta_star: DVector::from_vec(theta),
                gramian: None,
            });
        }
        Err(e) => return Err(e.into()),
    };

    report.consolidation_step_sweep = Some(jacobian_step_sweep(|x| run.pair.consolidate(x), &theta_star, opts.step)?);
    let support = dist.support(&theta_star)?;
    for (e, p) in &support {
        let norm = (run.pair.expand(&theta_star, e)? - &theta_star).norm();
        report.redundancy.push(RedundancyEntry {
            evidence_id: e.id().to_string(),
            probability: *p,
            norm,
            holds: norm <= opts.redundancy_tol,
        });
    }
    if report.redundancy.iter().any(|r| !r.holds) {
        report.status = SpectrumStatus::RedundancyViolated;
        return Ok(Core {
            report,
            theta_star,
            gramian: None,
        });
    }

    let g = gramian(&run.pair, dist, &theta_star, &opts)?;
    report.commutators = g
        .commutators
        .iter()
        .zip(&g.probabilities)
        .map(|(c, &p)| CommutatorEntry {
            evidence_id: c.evidence_id.clone(),
            probability: p,
            frobenius_norm: c.sigma.norm(),
            max_abs: c.sigma.amax(),
        })
        .collect();
    report.gramian = Some(GramianSummary {
        dim: g.dim(),
        eigenvalues: g.eigenvalues(),
        norm: g.norm(),
        symmetry_defect: g.symmetry_defect(),
    });
    let full = subspace_entry("full", &g, &Subspace::full(g.dim())?, &opts)?;
    report.verdict = Some(
        if full.nondegeneracy.positive_definite_on_w {
            "nondegenerate"
        } else {
            "degenerate"
        }
        .to_string(),
    );
    report.subspaces.push(full);
    for named in &spec.subspaces {
        let vectors: Vec<DVector<f64>> = named.vectors.iter().map(|v| DVector::from_column_slice(v)).collect();
        let w = Subspace::spanned_by(&vectors, opts.svd_rel_tol)?;
        report.subspaces.push(subspace_entry(&named.name, &g, &w, &opts)?);
    }
    Ok(Core {
        report,
        theta_star,
        gramian: Some(g),
    })
}

fn subspace_entry(name: &str, g: &Gramian, w: &Subspace, opts: &crate::spectral::SpectralOptions) -> HarnessResult<SubspaceEntry> {
    let nondegeneracy = nondegeneracy_check(g, w, opts.eigen_rel_tol)?;
    let kernel = kernel_intersection_oracle(&g.commutators, w, opts.svd_rel_tol)?;
    Ok(SubspaceEntry {
        name: name.to_string(),
        dim: w.dim(),
        agree: nondegeneracy.positive_definite_on_w == kernel.trivial,
        nondegeneracy,
        kernel,
    })
}

fn graph_sections(core: &mut Core, ops: &GraphOperators, slot_ids: &[Option<NodeId>], scn: &LoadedScenario) -> HarnessResult<()> {
    let Some(g) = &core.gramian else {
        return Ok(());
    };
    let opts = scn.spectrum.options();
    let eps = ops.params().presence_eps;
    let state = EmbeddedState::from_vector(*ops.config(), core.theta_star.clone()).map_err(SpectralError::from)?;
    let table = coverage_table(&state, g, opts.coverage_tol, eps)?;
    let directions: Vec<DVector<f64>> = table
        .iter()
        .map(|c| resolution_direction(&state, c.question, eps))
        .collect::<Result<_, _>>()?;
    core.report.coverage = table
        .into_iter()
        .map(|c| {
            let slot = c.question.0 as usize;
            CoverageRow {
                question: slot_ids.get(slot).copied().flatten(),
                slot,
                covered: c.covered,
                supporting: c.supporting,
                response: c.response,
            }
        })
        .collect();
    if !directions.is_empty() {
        let w = Subspace::spanned_by(&directions, opts.svd_rel_tol)?;
        let entry = subspace_entry("open-questions", g, &w, &opts)?;
        core.report.subspaces.insert(1, entry);
    }
    Ok(())
}

/// Spectral analysis of a loaded scenario.
pub fn spectrum(scn: &LoadedScenario) -> HarnessResult<SpectrumReport> {
    match &scn.system {
        LoadedSystem::Scalar2d(run) => Ok(spectral_core(scn, run)?.report),
        LoadedSystem::Graph { run, slot_ids } => {
            let mut core = spectral_core(scn, run)?;
            graph_sections(&mut core, &run.pair, slot_ids, scn)?;
            Ok(core.report)
        }
    }
}

/// Load, analyse and write `spectrum.json` and `spectrum.txt`.
pub fn analyze_spectrum(path: &Path, out: &Path) -> HarnessResult<SpectrumReport> {
    let report = spectrum(&LoadedScenario::load(path)?)?;
    let json = serde_json::to_value(&report).expect("spectrum reports serialise");
    write_spectrum(out, &json, &report.summary())?;
    Ok(report)
}
