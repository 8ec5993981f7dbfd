//! Convex potentials on the real line, their subdifferentials, resolvents,
//! Yosida approximations and Moreau envelopes.

mod assumptions;
mod potential;
mod yosida;

use thiserror::Error;

pub use assumptions::{check_assumptions, AssumptionReport, GrowthEvidence};
pub use potential::{ConvexPotential, PiecewiseQuadratic, PotentialKind};
pub use yosida::{cross_monotonicity_defect, CrossMonotonicity, YosidaApprox, RESOLVENT_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MonotoneError {
    #[error("{0}")]
    InvalidParameter(String),
    #[error("epsilon must lie in (0,1], got {0}")]
    EpsilonOutOfRange(f64),
    #[error("piecewise potential is discontinuous at {at}: {left} vs {right}")]
    Discontinuous { at: f64, left: f64, right: f64 },
    #[error("resolvent argument must be finite, got {0}")]
    NonFinite(f64),
    #[error("resolvent solve at r = {r} stalled after {iterations} iterations (residual {residual:e})")]
    NoConvergence { r: f64, residual: f64, iterations: usize },
}
