//! Deterministic kinematic simulation of a differential-drive robot tracking
//! a path with `pursuit-core`, plus scenario generators and run metrics.

use std::io;
use std::path::{Path as FsPath, PathBuf};

use thiserror::Error;

pub mod generate;
pub mod kinematics;
pub mod log;
pub mod metrics;
pub mod run;
pub mod scenario;

pub use generate::{generate_scenario, ScenarioKind};
pub use kinematics::{step_kinematics, RobotState, SimConfig};
pub use log::{TrajectoryLog, TrajectoryRecord};
pub use metrics::{compute_metrics, MetricsReport, Outcome};
pub use run::{resolve_configs, run_scenario, RunResult};
pub use scenario::{EventSpec, Scenario, ScenarioFile};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {reason}")]
    Parse { path: PathBuf, reason: String },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Config(#[from] pursuit_core::ConfigError),
    #[error(transparent)]
    Controller(#[from] pursuit_core::ControllerError),
    #[error(transparent)]
    Path(#[from] pursuit_core::PathError),
    #[error(transparent)]
    Grid(#[from] pursuit_core::CollisionError),
}

impl SimError {
    pub(crate) fn io(path: &FsPath, source: io::Error) -> Self {
        SimError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
