//! Monte Carlo integration of the regularized equation
//! `dX = L(β^ε(X) + εX) dt + B(X) dW` on a finite Dirichlet space.

mod brownian;
mod ensemble;
mod noise;
mod stepper;

use thiserror::Error;

use crate::dirichlet::DirichletError;
use crate::monotone::MonotoneError;

pub use brownian::BrownianSource;
pub use ensemble::{energy_budget, simulate, EnergyBudget, PathRecord, SimulationConfig, TrajectoryEnsemble};
pub use noise::{certify_noise, NoiseCertificate, NoiseLevel, NoiseModel, DEFAULT_CLIP, NU_GRID, UNIFORMITY_TOL};
pub use stepper::{step_semi_implicit, ImplicitStepper, StepOutcome, MAX_NEWTON, STEP_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Dirichlet(#[from] DirichletError),
    #[error(transparent)]
    Monotone(#[from] MonotoneError),
    #[error("invalid simulation setup: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("implicit solve failed{} (residual {residual:e} after {iterations} iterations)", location(*path, *step))]
    SolverFailed {
        path: Option<usize>,
        step: Option<usize>,
        residual: f64,
        iterations: usize,
    },
    #[error("non-finite state{}", location(*path, *step))]
    NonFinite { path: Option<usize>, step: Option<usize> },
}

fn location(path: Option<usize>, step: Option<usize>) -> String {
    match (path, step) {
        (Some(p), Some(n)) => format!(" at path {p}, step {n}"),
        _ => String::new(),
    }
}

impl SimError {
    /// Attaches a path/step location to solver errors.
    pub fn located(self, path: usize, step: usize) -> Self {
        match self {
            SimError::SolverFailed { residual, iterations, .. } => SimError::SolverFailed {
                path: Some(path),
                step: Some(step),
                residual,
                iterations,
            },
            SimError::NonFinite { .. } => SimError::NonFinite {
                path: Some(path),
                step: Some(step),
            },
            other => other,
        }
    }
}
