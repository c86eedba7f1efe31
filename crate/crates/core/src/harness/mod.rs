//! Scenario files, runs and reports.
//!
//! A scenario is a versioned JSON document naming a system (the closed-form
//! `scalar2d` pair or an embedded `graph`), its evidence as a fixed script or
//! a weighted distribution, and a loop configuration. Three drivers consume
//! it:
//!
//! * [`run_scenario`]: order-gap loop, emitting `trace.csv`, `report.json`
//!   and `summary.txt`
//! * [`compare_policies`]: order-gap stop against fixed budgets, emitting
//!   `compare.csv` and `compare.json`
//! * [`analyze_spectrum`]: fixed point, redundancy audit, Gramian verdicts
//!   and coverage, emitting `spectrum.json` and `spectrum.txt`
//!
//! Trace CSVs carry full precision. Tables in JSON and text reports are
//! rounded half-to-even at three decimals.

mod report;
mod run;
mod scenario;

pub use report::{round3, CompareReport, PolicyRow, RunReport, TableRow};
pub use run::{
    analyze_spectrum, compare, compare_policies, execute, run_scenario, spectrum, CommutatorEntry, CoverageRow,
    FixedPointEntry, GramianSummary, RedundancyEntry, SpectrumReport, SpectrumStatus, SubspaceEntry,
};
pub use scenario::{
    EvidenceSection, EvidenceSet, LoadedScenario, LoadedSystem, NamedBasis, Reweight, Scenario, SpectrumSpec,
    SpectrumStart, SystemKind, SystemRun, SystemSpec, SCENARIO_VERSION,
};

use std::path::{Path, PathBuf};

use serde_json::json;
use thiserror::Error;

use crate::operators::OperatorError;
use crate::spectral::SpectralError;
use crate::termination::TerminationError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
    #[error("{}:{line}:{column}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid scenario: {0}")]
    Validation(String),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Termination(#[from] TerminationError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

pub type HarnessResult<T> = Result<T, HarnessError>;

impl HarnessError {
    pub(crate) fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            message: err.to_string(),
        }
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Io { .. } => "io",
            Self::Parse { .. } => "parse",
            Self::Validation(_) => "validation",
            Self::Operator(OperatorError::EmptySupport)
            | Self::Termination(TerminationError::Operator(OperatorError::EmptySupport))
            | Self::Spectral(SpectralError::Operator(OperatorError::EmptySupport)) => "empty-support",
            Self::Operator(_) => "operator",
            Self::Termination(_) => "termination",
            Self::Spectral(_) => "spectral",
        }
    }

    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Parse { .. } => 2,
            Self::Validation(_) => 3,
            Self::Io { .. } => 4,
            _ => 1,
        }
    }

    /// `{"error": kind, "message": ..}` plus location fields for parse errors.
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = json!({ "error": self.kind(), "message": self.to_string() });
        match self {
            Self::Parse { path, line, column, .. } => {
                v["path"] = json!(path.display().to_string());
                v["line"] = json!(line);
                v["column"] = json!(column);
            }
            Self::Io { path, .. } => v["path"] = json!(path.display().to_string()),
            _ => {}
        }
        v
    }
}
