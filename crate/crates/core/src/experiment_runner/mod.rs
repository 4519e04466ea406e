//! Scenario configuration, end-to-end runs and reports.

mod config;
mod report;
mod scenario;

pub use config::{
    ActuatorSection, DetectorSection, LinkSection, LoopSection, MetricsSection, MziSection, PidSection, PpsSection,
    ReferenceSection, RfSection, Scenario, ScenarioConfig, WaveformSection,
};
pub use report::{emit_report, CurvePoint, OutputPaths, ReportFormat, RunReport, RunSummary};
pub use scenario::run_scenario;

use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq)]
pub enum RunnerError {
    /// Every validation problem found in a config.
    Config(Vec<String>),
    Simulation(String),
    Io {
        path: PathBuf,
        message: String,
    },
}

impl RunnerError {
    pub(crate) fn io(path: &Path, e: std::io::Error) -> Self {
        RunnerError::Io { path: path.to_path_buf(), message: e.to_string() }
    }

    /// Process exit code for the error category.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunnerError::Io { .. } => 1,
            RunnerError::Config(_) => 3,
            RunnerError::Simulation(_) => 4,
        }
    }
}

impl fmt::Display for RunnerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunnerError::Config(errs) => {
                write!(f, "invalid config ({} problem{}):", errs.len(), if errs.len() == 1 { "" } else { "s" })?;
                for e in errs {
                    write!(f, "\n  - {e}")?;
                }
                Ok(())
            }
            RunnerError::Simulation(m) => write!(f, "simulation failed: {m}"),
            RunnerError::Io { path, message } => write!(f, "{}: {message}", path.display()),
        }
    }
}

impl std::error::Error for RunnerError {}
