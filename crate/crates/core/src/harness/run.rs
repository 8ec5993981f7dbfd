use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use sha2::{Digest, Sha256};

use super::config::{default_grid, serialize, ExperimentConfig, ExperimentKind, NoiseSpec, PotentialSpec, SpaceSpec, StateSpec};
use super::presets::Preset;
use super::HarnessError;
use crate::dirichlet::{BernsteinFunction, DirichletSpace, DualFunctional};
use crate::monotone::{check_assumptions, ConvexPotential};
use crate::spde::{certify_noise, simulate, BrownianSource, NoiseModel, SimulationConfig, TrajectoryEnsemble};
use crate::svi::{
    build_test_process, check_svi, contraction_experiment, energy_report, epsilon_convergence, regularity_budget, DriftSpec,
    EnergyFunctional, EstimateReport,
};

/// Number of random states used to certify the noise constants.
pub const CERTIFY_SAMPLES: usize = 32;
/// Smallest `ν` of the dual-norm limit check.
pub const NU_LIMIT: f64 = 1e-6;
/// Relative gap allowed between the `ν`-norm at [`NU_LIMIT`] and the extended norm.
pub const NU_LIMIT_TOL: f64 = 1e-6;
/// Relative tolerance of the pairing identity `⟨L̄u, v⟩_{𝓕_e^*} = −μ(uv)`.
pub const PAIRING_TOL: f64 = 1e-10;

const NU_LADDER: [f64; 7] = [1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, NU_LIMIT];

/// Result of a run: every report, the artifact files in write order, and the
/// conjunction of the pass flags.
#[derive(Debug)]
pub struct RunOutcome {
    pub reports: Vec<EstimateReport>,
    pub artifacts: Vec<PathBuf>,
    pub passed: bool,
}

pub fn build_space(c: &ExperimentConfig) -> Result<Arc<DirichletSpace>, HarnessError> {
    let spec = c
        .space
        .as_ref()
        .ok_or_else(|| HarnessError::Setup("no space block".into()))?;
    let base = match spec {
        SpaceSpec::Preset(name) => Preset::parse(name).map_err(HarnessError::Setup)?.build()?,
        SpaceSpec::Graph { weights, killing, measure } => {
            let n = measure.len();
            let w = DMatrix::from_fn(n, n, |i, j| weights[i][j]);
            DirichletSpace::build_graph_space(&w, killing, measure)?
        }
    };
    let space = match c.fractional {
        Some(alpha) => base.subordinate(&BernsteinFunction::Power(alpha))?,
        None => base,
    };
    Ok(Arc::new(space))
}

pub fn build_potential(spec: &PotentialSpec) -> Result<ConvexPotential, HarnessError> {
    Ok(match spec {
        PotentialSpec::FastDiffusion { theta } => ConvexPotential::fast_diffusion(*theta)?,
        PotentialSpec::PorousMedium { gamma } => ConvexPotential::porous_medium(*gamma)?,
        PotentialSpec::Zhang => ConvexPotential::zhang(),
        PotentialSpec::Piecewise { breakpoints, pieces } => ConvexPotential::piecewise(breakpoints.clone(), pieces.clone())?,
    })
}

pub fn build_noise(spec: &NoiseSpec, nodes: usize) -> Result<NoiseModel, HarnessError> {
    Ok(match spec {
        NoiseSpec::Zero => NoiseModel::zero(nodes),
        NoiseSpec::Diagonal { sigma, clip } => NoiseModel::diagonal(*sigma, *clip, nodes)?,
        NoiseSpec::Additive { columns } => {
            if columns.iter().any(|c| c.len() != nodes) {
                return Err(HarnessError::Setup(format!("noise columns must have {nodes} entries")));
            }
            let cols: Vec<DVector<f64>> = columns.iter().map(|c| DVector::from_column_slice(c)).collect();
            NoiseModel::Additive {
                columns: DMatrix::from_columns(&cols),
            }
        }
    })
}

pub fn resolve_state(spec: &StateSpec, space: &DirichletSpace) -> Result<DVector<f64>, HarnessError> {
    let n = space.node_count();
    match spec {
        StateSpec::Values(v) if v.len() == n => Ok(DVector::from_column_slice(v)),
        StateSpec::Values(v) => Err(HarnessError::Setup(format!("state has {} entries for {n} nodes", v.len()))),
        StateSpec::Constant(c) => Ok(DVector::from_element(n, *c)),
        StateSpec::Eigen { index, scale } => {
            if *index >= n {
                return Err(HarnessError::Setup(format!("eigenfunction index {index} out of range for {n} nodes")));
            }
            let e = space.eigenfunction(*index);
            Ok(&e * (*scale / space.fe_star_norm_sq(&e).sqrt()))
        }
    }
}

/// Weight `K = 2C₁ + 1` from the certified Lipschitz constant, unless overridden.
pub fn weight_for(c: &ExperimentConfig, space: &DirichletSpace, noise: &NoiseModel) -> Result<f64, HarnessError> {
    if let Some(k) = c.run.k_weight {
        return Ok(k);
    }
    let src = BrownianSource::new(c.run.seed, "noise-certificate");
    let n = space.node_count();
    let samples: Vec<DVector<f64>> = (0..CERTIFY_SAMPLES as u64).map(|k| src.normals(0, k, n) * 2.0).collect();
    let cert = certify_noise(noise, space, &samples)?;
    Ok(2.0 * cert.c1 + 1.0)
}

struct Bench {
    space: Arc<DirichletSpace>,
    potential: ConvexPotential,
    noise: NoiseModel,
    initial: DVector<f64>,
}

impl Bench {
    fn new(c: &ExperimentConfig) -> Result<Self, HarnessError> {
        let space = build_space(c)?;
        let potential = build_potential(c.potential.as_ref().ok_or_else(|| HarnessError::Setup("no potential block".into()))?)?;
        let noise = build_noise(
            c.noise.as_ref().ok_or_else(|| HarnessError::Setup("no noise block".into()))?,
            space.node_count(),
        )?;
        let initial = resolve_state(&c.run.initial, &space)?;
        Ok(Bench {
            space,
            potential,
            noise,
            initial,
        })
    }

    fn sim(&self, c: &ExperimentConfig, epsilon: f64, initial: &DVector<f64>) -> SimulationConfig {
        SimulationConfig {
            space: self.space.clone(),
            potential: self.potential.clone(),
            noise: self.noise.clone(),
            epsilon,
            horizon: c.run.horizon,
            steps: c.run.steps,
            paths: c.run.paths,
            initial: initial.clone(),
            seed: c.run.seed,
            coupling_tag: c.run.tag.clone(),
        }
    }
}

struct Artifacts<'a> {
    dir: &'a Path,
    written: Vec<PathBuf>,
}

impl Artifacts<'_> {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), HarnessError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|source| HarnessError::Io { path: path.clone(), source })?;
        self.written.push(path);
        Ok(())
    }

    fn ensemble(&mut self, label: &str, ens: &TrajectoryEnsemble, enabled: bool) -> Result<(), HarnessError> {
        if !enabled {
            return Ok(());
        }
        let mut buf = Vec::new();
        ens.write_csv(&mut buf).map_err(|source| HarnessError::Io {
            path: self.dir.join(format!("trajectories_{label}.csv")),
            source,
        })?;
        self.write(&format!("trajectories_{label}.csv"), &buf)?;
        self.write(&format!("trajectories_{label}.meta.txt"), ens.metadata().as_bytes())
    }

    fn report(&mut self, r: &EstimateReport) -> Result<(), HarnessError> {
        self.write(&format!("{}.report.txt", r.name), r.to_document().as_bytes())?;
        self.write(&format!("{}.csv", r.name), r.to_csv().as_bytes())
    }
}

fn context(kind: ExperimentKind) -> impl Fn(crate::svi::SviError) -> HarnessError {
    move |source| HarnessError::Experiment {
        experiment: kind.name(),
        source,
    }
}

fn simulate_in(kind: ExperimentKind, cfg: &SimulationConfig) -> Result<TrajectoryEnsemble, HarnessError> {
    simulate(cfg).map_err(|e| context(kind)(e.into()))
}

fn hex_digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Runs the configured experiment, writing every artifact into `out_dir`.
/// Artifacts depend only on the config, never on scheduling or wall time.
pub fn run(c: &ExperimentConfig, out_dir: &Path) -> Result<RunOutcome, HarnessError> {
    fs::create_dir_all(out_dir).map_err(|source| HarnessError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let mut art = Artifacts {
        dir: out_dir,
        written: Vec::new(),
    };
    let canonical = serialize(c);
    art.write("config.txt", canonical.as_bytes())?;
    let kind = c.experiment;
    let dump = c.run.write_trajectories;
    let mut reports = Vec::new();

    match kind {
        ExperimentKind::Assumptions => {
            let pot = build_potential(c.potential.as_ref().ok_or_else(|| HarnessError::Setup("no potential block".into()))?)?;
            let a = check_assumptions(&pot, &c.assumptions_grid.clone().unwrap_or_else(default_grid));
            let mut r = EstimateReport::new("assumptions", &["check", "passed", "margin"]);
            for (name, ok, margin) in a.rows() {
                r.push_row(name, vec![f64::from(u8::from(ok)), margin]);
            }
            r.push_row("growth_right_observed", vec![f64::from(u8::from(a.growth_right.increasing())), f64::NAN]);
            r.push_row("growth_left_observed", vec![f64::from(u8::from(a.growth_left.increasing())), f64::NAN]);
            r.worst_margin = a.rows().iter().map(|row| row.2).fold(f64::INFINITY, f64::min);
            r.passed = a.passes();
            r.notes.push(format!("potential = {}", a.potential));
            r.notes.push("growth rows are evidence only and do not gate".into());
            if let Some(h3) = a.h3_constant {
                r.set_constant("h3_constant", h3);
            }
            r.set_constant("grid_points", a.grid_len as f64);
            reports.push(r);
        }
        ExperimentKind::Norms => {
            let space = build_space(c)?;
            reports.push(norms_report(&space, c.norms_samples, c.run.seed)?);
        }
        ExperimentKind::Svi => {
            let b = Bench::new(c)?;
            let func = EnergyFunctional::new(b.space.clone(), b.potential.clone());
            let x = simulate_in(kind, &b.sim(c, c.run.epsilon, &b.initial))?;
            art.ensemble("x", &x, dump)?;
            let z0 = resolve_state(&c.svi.test_initial, &b.space)?;
            let g = resolve_state(&c.svi.constant, &b.space)?;
            for drift in &c.svi.drifts {
                let y;
                let spec = match drift.as_str() {
                    "zero" => DriftSpec::Zero,
                    "constant" => DriftSpec::Constant(&g),
                    _ => {
                        y = simulate_in(kind, &b.sim(c, c.run.epsilon, &z0))?;
                        art.ensemble("test_source", &y, dump)?;
                        DriftSpec::FromRegularized(&y)
                    }
                };
                let z = build_test_process(&x, &z0, spec).map_err(context(kind))?;
                let mut r = check_svi(&x, &z, &func, c.svi.c).map_err(context(kind))?;
                r.name = format!("svi_{drift}");
                reports.push(r);
            }
        }
        ExperimentKind::Contraction => {
            let b = Bench::new(c)?;
            let k = weight_for(c, &b.space, &b.noise)?;
            let y0 = &b.initial + resolve_state(&c.contraction.offset, &b.space)?;
            let x = simulate_in(kind, &b.sim(c, c.run.epsilon, &b.initial))?;
            let y = simulate_in(kind, &b.sim(c, c.run.epsilon, &y0))?;
            art.ensemble("x", &x, dump)?;
            art.ensemble("y", &y, dump)?;
            reports.push(contraction_experiment(&x, &y, k).map_err(context(kind))?);
        }
        ExperimentKind::EpsConvergence | ExperimentKind::Energy | ExperimentKind::Regularity => {
            let b = Bench::new(c)?;
            let mut runs = Vec::with_capacity(c.run.epsilon_list.len());
            for &eps in &c.run.epsilon_list {
                let ens = simulate_in(kind, &b.sim(c, eps, &b.initial))?;
                art.ensemble(&format!("eps_{eps}"), &ens, dump)?;
                runs.push(ens);
            }
            let r = match kind {
                ExperimentKind::EpsConvergence => {
                    let k = weight_for(c, &b.space, &b.noise)?;
                    epsilon_convergence(&runs, k)
                }
                ExperimentKind::Energy => energy_report(&runs),
                _ => regularity_budget(&runs, &EnergyFunctional::new(b.space.clone(), b.potential.clone())),
            };
            reports.push(r.map_err(context(kind))?);
        }
    }

    for r in &reports {
        art.report(r)?;
    }
    let passed = reports.iter().all(|r| r.passed);

    let mut m = String::new();
    let _ = writeln!(m, "tool = {}", env!("CARGO_PKG_NAME"));
    let _ = writeln!(m, "version = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(m, "experiment = {}", kind.name());
    let _ = writeln!(m, "config_sha256 = {}", hex_digest(canonical.as_bytes()));
    let _ = writeln!(m, "seed = {}", c.run.seed);
    let _ = writeln!(m, "steps = {}", c.run.steps);
    let _ = writeln!(m, "paths = {}", c.run.paths);
    let _ = writeln!(m, "horizon = {:.16e}", c.run.horizon);
    if c.space.is_some() {
        let _ = writeln!(m, "nodes = {}", build_space(c)?.node_count());
    }
    let _ = writeln!(m, "epsilon = {:.16e}", c.run.epsilon);
    let list: Vec<String> = c.run.epsilon_list.iter().map(|e| format!("{e:.16e}")).collect();
    let _ = writeln!(m, "epsilon_list = {}", list.join(", "));
    let _ = writeln!(m, "passed = {passed}");
    for r in &reports {
        let _ = writeln!(m, "report.{} = {}", r.name, if r.passed { "pass" } else { "fail" });
    }
    for path in &art.written {
        let bytes = fs::read(path).map_err(|source| HarnessError::Io { path: path.clone(), source })?;
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let _ = writeln!(m, "artifact.{name} = {}", hex_digest(&bytes));
    }
    art.write("manifest.txt", m.as_bytes())?;

    Ok(RunOutcome {
        reports,
        artifacts: art.written,
        passed,
    })
}

/// Dual-norm limit and pairing identity on random densities drawn from the
/// counter-based source.
pub fn norms_report(space: &DirichletSpace, samples: usize, seed: u64) -> Result<EstimateReport, HarnessError> {
    let n = space.node_count();
    let src = BrownianSource::new(seed, "norms");
    let mut worst_limit = 0.0f64;
    let mut worst_monotone = f64::INFINITY;
    let mut worst_pairing = 0.0f64;
    for s in 0..samples as u64 {
        let l = DualFunctional::new(src.normals(0, s, n));
        let fe = space.dual_norm_fe(&l);
        let mut prev = 0.0;
        for &nu in &NU_LADDER {
            let v = space.dual_norm_nu(&l, nu)?;
            worst_monotone = worst_monotone.min(v - prev);
            prev = v;
        }
        worst_limit = worst_limit.max((fe - prev).abs() / fe.max(f64::MIN_POSITIVE));

        let u = src.normals(1, s, n);
        let v = src.normals(2, s, n);
        let pairing = space.fe_star_inner(&space.apply_lbar(&u)?.density, &v) + space.l2_inner(&u, &v);
        worst_pairing = worst_pairing.max(pairing.abs() / (space.l2_norm(&u) * space.l2_norm(&v)));
    }
    let mut r = EstimateReport::new("norms", &["check", "worst", "tolerance"]);
    r.push_row("nu_limit_relative_gap", vec![worst_limit, NU_LIMIT_TOL]);
    r.push_row("nu_monotone_increment", vec![worst_monotone, 0.0]);
    r.push_row("pairing_relative_defect", vec![worst_pairing, PAIRING_TOL]);
    r.set_constant("samples", samples as f64);
    r.set_constant("nodes", n as f64);
    r.worst_margin = (NU_LIMIT_TOL - worst_limit).min(worst_monotone).min(PAIRING_TOL - worst_pairing);
    r.passed = r.worst_margin >= 0.0;
    Ok(r)
}
