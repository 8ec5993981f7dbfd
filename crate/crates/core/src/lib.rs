//! Stochastic nonlinear diffusion on finite transient Dirichlet spaces.
//!
//! The crate is organised bottom-up:
//!
//! - [`dirichlet`]: weighted graphs with killing, their generators, semigroups,
//!   Bessel and dual norms, and Bernstein-function subordination.
//! - [`monotone`]: convex potentials, interval-valued subdifferentials,
//!   resolvents, Yosida approximations and Moreau envelopes.
//! - [`spde`]: noise models, the counter-based Brownian source, and the
//!   drift-implicit Monte Carlo integrator for the regularized equation
//!   `dX = L(β^ε(X) + εX) dt + B(X) dW`.
//! - [`svi`]: the energy functional, test processes and the estimate
//!   experiments (variational inequality, contraction, ε-convergence,
//!   regularity budget).
//! - [`harness`]: config parsing and the deterministic experiment runner used
//!   by the `svi-lab` binary.

pub mod dirichlet;
pub mod harness;
pub mod monotone;
pub mod spde;
pub mod stats;
pub mod svi;

pub use dirichlet::{BernsteinFunction, DirichletError, DirichletSpace, DualFunctional, NormPair};
pub use monotone::{ConvexPotential, MonotoneError, PotentialKind, YosidaApprox};
pub use spde::{NoiseModel, SimError, SimulationConfig, TrajectoryEnsemble};
pub use svi::{EnergyFunctional, EstimateReport, SviError, TestProcess};
