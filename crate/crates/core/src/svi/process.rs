use nalgebra::DVector;

use super::SviError;
use crate::spde::{NoiseModel, TrajectoryEnsemble};

/// Drift of a test process `dZ = G dt + B(Z) dW`.
#[derive(Clone, Copy, Debug)]
pub enum DriftSpec<'a> {
    Zero,
    Constant(&'a DVector<f64>),
    /// `G = εLY + Lβ^ε(Y)` evaluated along a regularized ensemble `Y`.
    FromRegularized(&'a TrajectoryEnsemble),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestPath {
    pub states: Vec<DVector<f64>>,
    /// `G` at every grid node; the step from `t_n` uses the node value at `t_{n+1}`,
    /// matching the drift-implicit scheme.
    pub drifts: Vec<DVector<f64>>,
}

/// Test process coupled to a reference ensemble: same seed, tag, grid and
/// Brownian increments.
#[derive(Clone, Debug, PartialEq)]
pub struct TestProcess {
    pub initial: DVector<f64>,
    pub drift_kind: &'static str,
    pub seed: u64,
    pub coupling_tag: String,
    pub dt: f64,
    pub paths: Vec<TestPath>,
}

impl TestProcess {
    /// Largest `|Z_{n+1} − Z_n − ΔtG_{n+1} − B(Z_n)dW_n|₂` over all paths and steps.
    pub fn step_residual(&self, noise: &NoiseModel, reference: &TrajectoryEnsemble) -> f64 {
        let mut worst = 0.0f64;
        for (zp, xp) in self.paths.iter().zip(&reference.paths) {
            for (n, dw) in xp.increments.iter().enumerate() {
                let z = &zp.states[n];
                let r = &zp.states[n + 1] - z - &zp.drifts[n + 1] * self.dt - noise.apply(z, dw);
                worst = worst.max(r.norm());
            }
        }
        worst
    }
}

fn check_coupled(reference: &TrajectoryEnsemble, other: &TrajectoryEnsemble) -> Result<(), SviError> {
    let (a, b) = (&reference.config, &other.config);
    let mut problems = Vec::new();
    if a.coupling_tag != b.coupling_tag || a.seed != b.seed {
        problems.push(format!(
            "noise streams differ ({}/{} vs {}/{})",
            a.seed, a.coupling_tag, b.seed, b.coupling_tag
        ));
    }
    if a.steps != b.steps || a.horizon != b.horizon {
        problems.push("time grids differ".to_string());
    }
    if reference.paths.len() != other.paths.len() {
        problems.push(format!("path counts differ ({} vs {})", reference.paths.len(), other.paths.len()));
    }
    if a.space.node_count() != b.space.node_count() {
        problems.push("node counts differ".to_string());
    }
    if a.noise.mode_count() != b.noise.mode_count() {
        problems.push("noise mode counts differ".to_string());
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(SviError::Decoupled(problems.join("; ")))
    }
}

/// Realizes `Z_{n+1} = Z_n + ΔtG_{n+1} + B(Z_n)dW_n` on every path of `reference`,
/// reusing its increments. With `FromRegularized(Y)` and `z0 = Y_0` built on the
/// same noise model, `Z` reproduces `Y` up to the implicit solver tolerance.
pub fn build_test_process(
    reference: &TrajectoryEnsemble,
    z0: &DVector<f64>,
    spec: DriftSpec<'_>,
) -> Result<TestProcess, SviError> {
    let cfg = &reference.config;
    let n = cfg.space.node_count();
    if z0.len() != n {
        return Err(SviError::Mismatch(format!("test initial state has {} entries for {n} nodes", z0.len())));
    }
    let steps = cfg.steps;
    let dt = cfg.dt();
    let noise = &cfg.noise;

    let (drift_kind, drift_paths): (&'static str, Vec<Vec<DVector<f64>>>) = match spec {
        DriftSpec::Zero => ("zero", vec![vec![DVector::zeros(n); steps + 1]; reference.paths.len()]),
        DriftSpec::Constant(g) => {
            if g.len() != n {
                return Err(SviError::Mismatch(format!("constant drift has {} entries for {n} nodes", g.len())));
            }
            ("constant", vec![vec![g.clone(); steps + 1]; reference.paths.len()])
        }
        DriftSpec::FromRegularized(y) => {
            check_coupled(reference, y)?;
            let approx = y.config.approx()?;
            let eps = y.config.epsilon;
            let l = y.config.space.generator();
            let mut all = Vec::with_capacity(y.paths.len());
            for path in &y.paths {
                let mut drifts = Vec::with_capacity(steps + 1);
                for state in &path.states {
                    let mut g = DVector::zeros(n);
                    for (o, &v) in g.iter_mut().zip(state.iter()) {
                        *o = approx.yosida(v)? + eps * v;
                    }
                    drifts.push(l * g);
                }
                all.push(drifts);
            }
            ("from_regularized", all)
        }
    };

    let paths = reference
        .paths
        .iter()
        .zip(drift_paths)
        .map(|(xp, drifts)| {
            let mut states = Vec::with_capacity(steps + 1);
            let mut z = z0.clone();
            states.push(z.clone());
            for (k, dw) in xp.increments.iter().enumerate() {
                z = &z + &drifts[k + 1] * dt + noise.apply(&z, dw);
                states.push(z.clone());
            }
            TestPath { states, drifts }
        })
        .collect();

    Ok(TestProcess {
        initial: z0.clone(),
        drift_kind,
        seed: cfg.seed,
        coupling_tag: cfg.coupling_tag.clone(),
        dt,
        paths,
    })
}
