use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use super::{HarnessError, HarnessResult, SystemKind};
use crate::graph::EpistemicStateGraph;
use crate::termination::{GapTrace, LoopConfig, StopReason};

/// Round half-to-even at three decimals. Never returns `-0.0`.
pub fn round3(x: f64) -> f64 {
    (x * 1000.0).round_ties_even() / 1000.0 + 0.0
}

fn round_all(xs: &[f64]) -> Vec<f64> {
    xs.iter().copied().map(round3).collect()
}

/// Shortest representation that reads back to the same `f64`.
fn exact(x: f64) -> String {
    format!("{x}")
}

fn write_file(path: &Path, bytes: &[u8]) -> HarnessResult<()> {
    fs::write(path, bytes).map_err(|e| HarnessError::io(path, e))
}

fn prepare_dir(out: &Path) -> HarnessResult<()> {
    fs::create_dir_all(out).map_err(|e| HarnessError::io(out, e))
}

fn pretty(value: &serde_json::Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("json values serialise");
    s.push('\n');
    s.into_bytes()
}

fn csv_bytes(path: &Path, header: &[String], rows: &[Vec<String>]) -> HarnessResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| HarnessError::io(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| HarnessError::io(path, e))?;
    }
    w.into_inner().map_err(|e| HarnessError::io(path, e))
}

fn reason_name(reason: Option<StopReason>) -> &'static str {
    match reason {
        Some(StopReason::ThresholdMet) => "threshold-met",
        Some(StopReason::BudgetExhausted) | None => "budget-exhausted",
    }
}

/// One rounded trace row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub t: usize,
    pub evidence_id: String,
    pub omega: f64,
    pub windowed: Option<f64>,
    pub state: Vec<f64>,
}

/// Outcome of an order-gap run, at full precision.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub name: String,
    pub system: SystemKind,
    pub coordinates: Vec<String>,
    pub loop_config: LoopConfig,
    pub trace: GapTrace,
    pub final_state: Vec<f64>,
    /// Decoded final state for graph systems. Node ids are slot indices.
    pub final_graph: Option<EpistemicStateGraph>,
}

impl RunReport {
    pub fn stop_step(&self) -> usize {
        self.trace.stop_step.unwrap_or(self.trace.records.len())
    }

    pub fn stop_reason(&self) -> &'static str {
        reason_name(self.trace.stop_reason)
    }

    pub fn rounded_table(&self) -> Vec<TableRow> {
        self.trace
            .records
            .iter()
            .map(|r| TableRow {
                t: r.step,
                evidence_id: r.evidence_id.clone(),
                omega: round3(r.omega),
                windowed: r.windowed.map(round3),
                state: round_all(&r.theta),
            })
            .collect()
    }

    /// Header `t, evidence_id, omega, windowed` then one column per state
    /// coordinate; one row per step, no row for the initial state.
    pub fn trace_csv(&self) -> HarnessResult<Vec<u8>> {
        let mut header: Vec<String> = ["t", "evidence_id", "omega", "windowed"].map(String::from).to_vec();
        header.extend(self.coordinates.iter().cloned());
        let rows: Vec<Vec<String>> = self
            .trace
            .records
            .iter()
            .map(|r| {
                let mut row = vec![
                    r.step.to_string(),
                    r.evidence_id.clone(),
                    exact(r.omega),
                    r.windowed.map(exact).unwrap_or_default(),
                ];
                row.extend(r.theta.iter().copied().map(exact));
                row
            })
            .collect();
        csv_bytes(Path::new("trace.csv"), &header, &rows)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = json!({
            "name": self.name,
            "system": self.system,
            "coordinates": self.coordinates,
            "loop": self.loop_config,
            "stop_step": self.stop_step(),
            "stop_reason": self.stop_reason(),
            "initial_state": round_all(&self.trace.initial),
            "final_state": round_all(&self.final_state),
            "table": self.rounded_table(),
        });
        if let Some(g) = &self.final_graph {
            v["final_graph"] = serde_json::to_value(g).expect("graphs serialise");
        }
        v
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let c = &self.loop_config;
        let _ = writeln!(s, "scenario {} ({})", self.name, system_name(self.system));
        let _ = writeln!(
            s,
            "stopped at step {}: {} (epsilon {}, window {}, budget {}, seed {})",
            self.stop_step(),
            self.stop_reason(),
            c.epsilon,
            c.window,
            c.budget,
            c.seed
        );
        let _ = writeln!(s);
        let show_state = self.system == SystemKind::Scalar2d;
        let _ = write!(s, "{:>4}  {:<12} {:>8} {:>9}", "t", "evidence", "omega", "windowed");
        if show_state {
            for name in &self.coordinates {
                let _ = write!(s, " {name:>7}");
            }
        }
        let _ = writeln!(s);
        for row in self.rounded_table() {
            let windowed = row.windowed.map_or("-".to_string(), |w| format!("{w:.3}"));
            let _ = write!(s, "{:>4}  {:<12} {:>8.3} {:>9}", row.t, row.evidence_id, row.omega, windowed);
            if show_state {
                for x in &row.state {
                    let _ = write!(s, " {x:>7.3}");
                }
            }
            let _ = writeln!(s);
        }
        let _ = writeln!(s);
        let state: Vec<String> = round_all(&self.final_state).iter().map(|x| format!("{x:.3}")).collect();
        if show_state {
            let _ = writeln!(s, "final state: ({})", state.join(", "));
        }
        if let Some(g) = &self.final_graph {
            let _ = writeln!(s, "final graph: {} nodes, {} edges", g.node_count(), g.edge_count());
            for n in g.nodes() {
                let _ = writeln!(s, "  {} {:?} confidence {:.3}", n.id, n.kind, round3(n.confidence));
            }
        }
        s
    }

    /// Write `trace.csv`, `report.json` and `summary.txt` into `out`.
    pub fn write(&self, out: &Path) -> HarnessResult<()> {
        prepare_dir(out)?;
        write_file(&out.join("trace.csv"), &self.trace_csv()?)?;
        write_file(&out.join("report.json"), &pretty(&self.to_json()))?;
        write_file(&out.join("summary.txt"), self.summary().as_bytes())
    }
}

fn system_name(kind: SystemKind) -> &'static str {
    match kind {
        SystemKind::Scalar2d => "scalar2d",
        SystemKind::Graph => "graph",
    }
}

/// One stopping policy and how far its final state lies from the order-gap
/// stop state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyRow {
    /// `order-gap` or `fixed-budget-N`.
    pub policy: String,
    pub budget: Option<usize>,
    pub steps: usize,
    pub stop_reason: String,
    pub final_state: Vec<f64>,
    /// `final_state − θ_stop`.
    pub delta: Vec<f64>,
    /// `‖final_state − θ_stop‖`.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub name: String,
    pub coordinates: Vec<String>,
    /// Order-gap row first, then one row per budget in the order given.
    pub rows: Vec<PolicyRow>,
}

impl CompareReport {
    pub fn row(&self, policy: &str) -> Option<&PolicyRow> {
        self.rows.iter().find(|r| r.policy == policy)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                json!({
                    "policy": r.policy,
                    "budget": r.budget,
                    "steps": r.steps,
                    "stop_reason": r.stop_reason,
                    "final_state": round_all(&r.final_state),
                    "delta": round_all(&r.delta),
                    "distance": round3(r.distance),
                })
            })
            .collect();
        json!({ "name": self.name, "coordinates": self.coordinates, "policies": rows })
    }

    /// Full-precision rows: policy, steps, stop reason, distance, the final
    /// state, then the delta per coordinate.
    pub fn csv(&self) -> HarnessResult<Vec<u8>> {
        let mut header: Vec<String> = ["policy", "steps", "stop_reason", "distance"].map(String::from).to_vec();
        header.extend(self.coordinates.iter().cloned());
        header.extend(self.coordinates.iter().map(|c| format!("delta_{c}")));
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                let mut row = vec![r.policy.clone(), r.steps.to_string(), r.stop_reason.clone(), exact(r.distance)];
                row.extend(r.final_state.iter().copied().map(exact));
                row.extend(r.delta.iter().copied().map(exact));
                row
            })
            .collect();
        csv_bytes(Path::new("compare.csv"), &header, &rows)
    }

    pub fn write(&self, out: &Path) -> HarnessResult<()> {
        prepare_dir(out)?;
        write_file(&out.join("compare.csv"), &self.csv()?)?;
        write_file(&out.join("compare.json"), &pretty(&self.to_json()))
    }
}

pub(crate) fn write_spectrum(out: &Path, json: &serde_json::Value, summary: &str) -> HarnessResult<()> {
    prepare_dir(out)?;
    write_file(&out.join("spectrum.json"), &pretty(json))?;
    write_file(&out.join("spectrum.txt"), summary.as_bytes())
}

pub(crate) fn stop_reason_name(reason: Option<StopReason>) -> &'static str {
    reason_name(reason)
}
