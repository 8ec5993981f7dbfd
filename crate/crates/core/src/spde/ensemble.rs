use std::fmt::Write as _;
use std::io::{self, Write};
use std::sync::Arc;

use nalgebra::DVector;
use rayon::prelude::*;

use super::brownian::BrownianSource;
use super::noise::NoiseModel;
use super::stepper::{ImplicitStepper, STEP_TOL};
use super::SimError;
use crate::dirichlet::DirichletSpace;
use crate::monotone::{ConvexPotential, YosidaApprox};
use crate::stats::{batch_means, trapezoid, Estimate, MIN_BATCHES};

#[derive(Clone, Debug)]
pub struct SimulationConfig {
    pub space: Arc<DirichletSpace>,
    pub potential: ConvexPotential,
    pub noise: NoiseModel,
    pub epsilon: f64,
    pub horizon: f64,
    pub steps: usize,
    pub paths: usize,
    pub initial: DVector<f64>,
    pub seed: u64,
    /// Runs sharing a tag (and seed) consume identical Brownian increments.
    pub coupling_tag: String,
}

impl SimulationConfig {
    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let mut problems = Vec::new();
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            problems.push(format!("epsilon must lie in (0,1), got {}", self.epsilon));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            problems.push(format!("horizon must be positive, got {}", self.horizon));
        }
        if self.steps == 0 {
            problems.push("step count must be positive".into());
        }
        if self.paths == 0 {
            problems.push("path count must be positive".into());
        }
        let n = self.space.node_count();
        if self.initial.len() != n {
            problems.push(format!("initial state has {} entries for {n} nodes", self.initial.len()));
        }
        if self.initial.iter().any(|v| !v.is_finite()) {
            problems.push("initial state must be finite".into());
        }
        if self.noise.node_count() != n {
            problems.push(format!("noise acts on {} nodes, space has {n}", self.noise.node_count()));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(SimError::InvalidConfig(problems.join("; ")))
        }
    }

    pub fn approx(&self) -> Result<YosidaApprox, SimError> {
        Ok(YosidaApprox::new(self.potential.clone(), self.epsilon)?)
    }

    pub fn brownian(&self) -> BrownianSource {
        BrownianSource::new(self.seed, &self.coupling_tag)
    }
}

/// One Monte Carlo path on the time grid `t_n = nΔt`, `n = 0..=N`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathRecord {
    pub states: Vec<DVector<f64>>,
    /// `dW_n` driving the step from `t_n` to `t_{n+1}`.
    pub increments: Vec<DVector<f64>>,
    pub residuals: Vec<f64>,
    pub iterations: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct TrajectoryEnsemble {
    pub config: SimulationConfig,
    pub paths: Vec<PathRecord>,
}

impl TrajectoryEnsemble {
    pub fn times(&self) -> Vec<f64> {
        let dt = self.config.dt();
        (0..=self.config.steps).map(|n| n as f64 * dt).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.paths.iter().flat_map(|p| p.residuals.iter().copied()).fold(0.0, f64::max)
    }

    pub fn max_iterations(&self) -> usize {
        self.paths.iter().flat_map(|p| p.iterations.iter().copied()).max().unwrap_or(0)
    }

    pub fn mean_iterations(&self) -> f64 {
        let total: usize = self.paths.iter().flat_map(|p| p.iterations.iter()).sum();
        let count: usize = self.paths.iter().map(|p| p.iterations.len()).sum();
        total as f64 / count.max(1) as f64
    }

    /// Trajectory CSV: `path,step,time,node_0,…`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        let n = self.config.space.node_count();
        let mut header = String::from("path,step,time");
        for i in 0..n {
            let _ = write!(header, ",node_{i}");
        }
        writeln!(out, "{header}")?;
        let times = self.times();
        for (p, path) in self.paths.iter().enumerate() {
            for (k, state) in path.states.iter().enumerate() {
                let mut line = format!("{p},{k},{:.16e}", times[k]);
                for v in state.iter() {
                    let _ = write!(line, ",{v:.16e}");
                }
                writeln!(out, "{line}")?;
            }
        }
        Ok(())
    }

    /// Key-value sidecar describing how the trajectories were produced.
    pub fn metadata(&self) -> String {
        let c = &self.config;
        let mut s = String::new();
        let _ = writeln!(s, "nodes = {}", c.space.node_count());
        let _ = writeln!(s, "potential = {}", c.potential.name());
        let _ = writeln!(s, "noise = {}", c.noise.name());
        let _ = writeln!(s, "modes = {}", c.noise.mode_count());
        let _ = writeln!(s, "epsilon = {:.16e}", c.epsilon);
        let _ = writeln!(s, "horizon = {:.16e}", c.horizon);
        let _ = writeln!(s, "steps = {}", c.steps);
        let _ = writeln!(s, "paths = {}", c.paths);
        let _ = writeln!(s, "seed = {}", c.seed);
        let _ = writeln!(s, "coupling_tag = {}", c.coupling_tag);
        let _ = writeln!(s, "residual_tolerance = {STEP_TOL:.16e}");
        let _ = writeln!(s, "max_residual = {:.16e}", self.max_residual());
        let _ = writeln!(s, "max_iterations = {}", self.max_iterations());
        let _ = writeln!(s, "mean_iterations = {:.16e}", self.mean_iterations());
        s
    }
}

/// Runs every path of the ensemble; paths are evaluated in parallel but the
/// result is independent of scheduling.
pub fn simulate(config: &SimulationConfig) -> Result<TrajectoryEnsemble, SimError> {
    config.validate()?;
    let approx = config.approx()?;
    let stepper = ImplicitStepper::new(&config.space, &approx, config.dt())?;
    let source = config.brownian();
    let modes = config.noise.mode_count();
    let dt = config.dt();

    let paths = (0..config.paths)
        .into_par_iter()
        .map(|p| {
            let mut states = Vec::with_capacity(config.steps + 1);
            let mut increments = Vec::with_capacity(config.steps);
            let mut residuals = Vec::with_capacity(config.steps);
            let mut iterations = Vec::with_capacity(config.steps);
            let mut x = config.initial.clone();
            states.push(x.clone());
            for n in 0..config.steps {
                let dw = source.increments(p as u64, n as u64, modes, dt);
                let out = stepper
                    .step(&config.noise, &x, &dw)
                    .map_err(|e| e.located(p, n))?;
                if out.state.iter().any(|v| !v.is_finite()) {
                    return Err(SimError::NonFinite {
                        path: Some(p),
                        step: Some(n),
                    });
                }
                x = out.state;
                states.push(x.clone());
                increments.push(dw);
                residuals.push(out.residual);
                iterations.push(out.iterations);
            }
            Ok(PathRecord {
                states,
                increments,
                residuals,
                iterations,
            })
        })
        .collect::<Result<Vec<_>, SimError>>()?;

    Ok(TrajectoryEnsemble {
        config: config.clone(),
        paths,
    })
}

/// Monte Carlo terms of the a-priori energy bound
/// `E sup_t |X_t|²₂ + εE∫₀ᵀ‖X_s‖²_{F_{1,2}} ds ≤ C(E|x₀|²₂ + 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyBudget {
    pub epsilon: f64,
    pub sup_term: Estimate,
    pub dissipation: Estimate,
    pub lhs: Estimate,
    /// `lhs / (|x₀|²₂ + 1)`.
    pub implied_constant: Estimate,
}

pub fn energy_budget(ensemble: &TrajectoryEnsemble) -> Result<EnergyBudget, SimError> {
    let c = &ensemble.config;
    let space = &c.space;
    let dt = c.dt();
    let mut sups = Vec::with_capacity(ensemble.paths.len());
    let mut diss = Vec::with_capacity(ensemble.paths.len());
    for path in &ensemble.paths {
        let sup = path.states.iter().map(|x| space.l2_inner(x, x)).fold(0.0, f64::max);
        let mut f12 = Vec::with_capacity(path.states.len());
        for x in &path.states {
            f12.push(space.f12_norm(x)?.powi(2));
        }
        sups.push(sup);
        diss.push(c.epsilon * trapezoid(&f12, dt));
    }
    let total: Vec<f64> = sups.iter().zip(&diss).map(|(a, b)| a + b).collect();
    let denom = space.l2_inner(&c.initial, &c.initial) + 1.0;
    let implied: Vec<f64> = total.iter().map(|v| v / denom).collect();
    Ok(EnergyBudget {
        epsilon: c.epsilon,
        sup_term: batch_means(&sups, MIN_BATCHES),
        dissipation: batch_means(&diss, MIN_BATCHES),
        lhs: batch_means(&total, MIN_BATCHES),
        implied_constant: batch_means(&implied, MIN_BATCHES),
    })
}
