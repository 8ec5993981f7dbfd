//! The energy functional, test processes and the Monte Carlo checks of the
//! quantitative estimates: variational inequality, contraction, ε-convergence,
//! energy and regularity budgets, mollification.

mod energy;
mod experiments;
mod process;
mod report;

use thiserror::Error;

use crate::dirichlet::DirichletError;
use crate::monotone::MonotoneError;
use crate::spde::SimError;

pub use energy::{EnergyFunctional, Mollified};
pub use experiments::{
    check_svi, contraction_experiment, energy_report, epsilon_convergence, mollification_report, pair_distance,
    regularity_budget, regularity_estimate, weighted_differences, RegularityEstimate, BAND_FACTOR, CONTRACTION_FACTOR,
    MIN_EPS_SLOPE, MOLLIFY_TOL,
};
pub use process::{build_test_process, DriftSpec, TestPath, TestProcess};
pub use report::EstimateReport;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SviError {
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error(transparent)]
    Dirichlet(#[from] DirichletError),
    #[error(transparent)]
    Monotone(#[from] MonotoneError),
    #[error("runs are not coupled: {0}")]
    Decoupled(String),
    #[error("{0}")]
    Mismatch(String),
}
