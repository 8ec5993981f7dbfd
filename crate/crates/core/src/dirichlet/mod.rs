//! Finite transient Dirichlet spaces built from weighted graphs with killing.

mod bernstein;
mod space;

use thiserror::Error;

pub use bernstein::BernsteinFunction;
pub use space::{DirichletSpace, DualFunctional, NormPair};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DirichletError {
    #[error("space must have at least one node")]
    Empty,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("asymmetric weights at ({i}, {j})")]
    AsymmetricWeights { i: usize, j: usize },
    #[error("generator is not symmetric with respect to the measure at ({i}, {j})")]
    NotSymmetric { i: usize, j: usize },
    #[error("edge weights must have a zero diagonal (node {node})")]
    NonzeroDiagonal { node: usize },
    #[error("edge weight at ({i}, {j}) must be finite and nonnegative, got {value}")]
    NegativeWeight { i: usize, j: usize, value: f64 },
    #[error("measure must be strictly positive at node {node}, got {value}")]
    NonPositiveMeasure { node: usize, value: f64 },
    #[error("killing rate must be finite and nonnegative at node {node}, got {value}")]
    NegativeKilling { node: usize, value: f64 },
    #[error("not transient: component {component:?} has no killing")]
    NotTransient { component: Vec<usize> },
    #[error("eigen-decomposition residual {residual:e} exceeds tolerance")]
    SpectralResidual { residual: f64 },
    #[error("negative time {0}")]
    NegativeTime(f64),
    #[error("unsupported operator norm pair ({p}, {q})")]
    UnsupportedNormPair { p: u32, q: String },
    #[error("subordinated generator violates the sub-Markov sign structure by {defect:e}")]
    SubMarkovViolation { defect: f64 },
    #[error("{0}")]
    InvalidParameter(String),
}
