//! Config-driven experiment runner behind the `svi-lab` binary.

mod config;
mod presets;
mod run;

use std::path::PathBuf;

use thiserror::Error;

use crate::dirichlet::DirichletError;
use crate::monotone::MonotoneError;
use crate::spde::SimError;
use crate::svi::SviError;

pub use config::{
    default_grid, parse_config, serialize, ConfigIssue, ContractionSpec, ExperimentConfig, ExperimentKind, NoiseSpec, PotentialSpec,
    RunSpec, SpaceSpec, StateSpec, SviSpec, DEFAULT_EPSILON, DEFAULT_EPSILON_LIST,
};
pub use presets::{preset_space, Preset, PresetGraph, FRAC_BASE_NODES, PRESET_HELP};
pub use run::{
    build_noise, build_potential, build_space, norms_report, resolve_state, run, weight_for, RunOutcome, CERTIFY_SAMPLES,
    NU_LIMIT, NU_LIMIT_TOL, PAIRING_TOL,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config:\n{}", .0.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n"))]
    Config(Vec<ConfigIssue>),
    #[error("{0}")]
    Setup(String),
    #[error(transparent)]
    Dirichlet(#[from] DirichletError),
    #[error(transparent)]
    Monotone(#[from] MonotoneError),
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error("{experiment} experiment failed: {source}")]
    Experiment {
        experiment: &'static str,
        #[source]
        source: SviError,
    },
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
