use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::presets::Preset;

/// The experiment a config dispatches to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    Svi,
    Contraction,
    EpsConvergence,
    Energy,
    Regularity,
    Assumptions,
    Norms,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::Svi,
        ExperimentKind::Contraction,
        ExperimentKind::EpsConvergence,
        ExperimentKind::Energy,
        ExperimentKind::Regularity,
        ExperimentKind::Assumptions,
        ExperimentKind::Norms,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Svi => "svi",
            ExperimentKind::Contraction => "contraction",
            ExperimentKind::EpsConvergence => "eps_convergence",
            ExperimentKind::Energy => "energy",
            ExperimentKind::Regularity => "regularity",
            ExperimentKind::Assumptions => "assumptions",
            ExperimentKind::Norms => "norms",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Blocks the experiment cannot run without.
    fn required_blocks(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::Assumptions => &["potential"],
            ExperimentKind::Norms => &["space"],
            _ => &["space", "potential", "noise"],
        }
    }

    /// Whether the run block carries an ε-grid instead of a single ε.
    fn uses_epsilon_list(self) -> bool {
        matches!(self, ExperimentKind::EpsConvergence | ExperimentKind::Energy | ExperimentKind::Regularity)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpaceSpec {
    Preset(String),
    Graph {
        /// Row-major `n × n` edge weights.
        weights: Vec<Vec<f64>>,
        killing: Vec<f64>,
        measure: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum PotentialSpec {
    FastDiffusion { theta: f64 },
    PorousMedium { gamma: f64 },
    Zhang,
    Piecewise { breakpoints: Vec<f64>, pieces: Vec<[f64; 3]> },
}

#[derive(Clone, Debug, PartialEq)]
pub enum NoiseSpec {
    Zero,
    Diagonal { sigma: f64, clip: f64 },
    /// Columns of the constant noise operator, one per mode.
    Additive { columns: Vec<Vec<f64>> },
}

/// State specification: explicit node values, a constant, or a scaled
/// eigenfunction normalized in the extended dual norm.
#[derive(Clone, Debug, PartialEq)]
pub enum StateSpec {
    Values(Vec<f64>),
    Constant(f64),
    Eigen { index: usize, scale: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub epsilon: f64,
    pub epsilon_list: Vec<f64>,
    pub horizon: f64,
    pub steps: usize,
    pub paths: usize,
    pub seed: u64,
    pub tag: String,
    pub initial: StateSpec,
    /// Weight `K` of `e^{−Kt}`; `None` means `2C₁ + 1` from the noise certificate.
    pub k_weight: Option<f64>,
    pub write_trajectories: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SviSpec {
    /// Test drifts among `zero`, `constant`, `from_regularized`.
    pub drifts: Vec<String>,
    pub constant: StateSpec,
    pub test_initial: StateSpec,
    pub c: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContractionSpec {
    /// Offset `y₀ − x₀`.
    pub offset: StateSpec,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub space: Option<SpaceSpec>,
    pub fractional: Option<f64>,
    pub potential: Option<PotentialSpec>,
    pub noise: Option<NoiseSpec>,
    pub run: RunSpec,
    pub svi: SviSpec,
    pub contraction: ContractionSpec,
    /// `None` selects the default grid on `[-10, 10]`.
    pub assumptions_grid: Option<Vec<f64>>,
    pub norms_samples: usize,
}

/// A single parse or validation problem.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigIssue {
    pub line: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl std::fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (&self.line, &self.field) {
            (Some(l), Some(k)) => write!(f, "line {l}: {k}: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            (None, Some(k)) => write!(f, "{k}: {}", self.message),
            (None, None) => write!(f, "{}", self.message),
        }
    }
}

const KNOWN_KEYS: &[&str] = &[
    "experiment.kind",
    "space.preset",
    "space.weights",
    "space.killing",
    "space.measure",
    "space.fractional",
    "potential.kind",
    "potential.theta",
    "potential.gamma",
    "potential.breakpoints",
    "potential.pieces",
    "noise.kind",
    "noise.sigma",
    "noise.clip",
    "noise.columns",
    "run.epsilon",
    "run.epsilon_list",
    "run.horizon",
    "run.steps",
    "run.paths",
    "run.seed",
    "run.tag",
    "run.initial",
    "run.k_weight",
    "run.write_trajectories",
    "svi.drifts",
    "svi.constant",
    "svi.test_initial",
    "svi.c",
    "contraction.offset",
    "assumptions.grid",
    "norms.samples",
];

pub const DEFAULT_EPSILON: f64 = 0.1;
pub const DEFAULT_EPSILON_LIST: [f64; 4] = [0.2, 0.1, 0.05, 0.025];
pub const DEFAULT_CLIP: f64 = crate::spde::DEFAULT_CLIP;

struct Entry {
    line: usize,
    value: String,
}

struct Reader {
    entries: BTreeMap<String, Entry>,
    issues: Vec<ConfigIssue>,
}

impl Reader {
    fn issue(&mut self, key: &str, message: impl Into<String>) {
        let line = self.entries.get(key).map(|e| e.line);
        self.issues.push(ConfigIssue {
            line,
            field: Some(key.to_string()),
            message: message.into(),
        });
    }

    fn has_block(&self, block: &str) -> bool {
        let prefix = format!("{block}.");
        self.entries.keys().any(|k| k.starts_with(&prefix))
    }

    fn raw(&self, key: &str) -> Option<String> {
        self.entries.get(key).map(|e| e.value.clone())
    }

    fn f64_or(&mut self, key: &str, default: f64) -> f64 {
        self.f64_opt(key).unwrap_or(default)
    }

    fn f64_opt(&mut self, key: &str) -> Option<f64> {
        let raw = self.raw(key)?;
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => Some(v),
            _ => {
                self.issue(key, format!("expected a finite number, got `{raw}`"));
                None
            }
        }
    }

    fn usize_or(&mut self, key: &str, default: usize) -> usize {
        let Some(raw) = self.raw(key) else { return default };
        match raw.parse::<usize>() {
            Ok(v) => v,
            Err(_) => {
                self.issue(key, format!("expected a nonnegative integer, got `{raw}`"));
                default
            }
        }
    }

    fn list(&mut self, key: &str) -> Option<Vec<f64>> {
        let raw = self.raw(key)?;
        match parse_list(&raw) {
            Ok(v) => Some(v),
            Err(e) => {
                self.issue(key, e);
                None
            }
        }
    }

    fn rows(&mut self, key: &str) -> Option<Vec<Vec<f64>>> {
        let raw = self.raw(key)?;
        let mut out = Vec::new();
        for row in raw.split(';') {
            match parse_list(row) {
                Ok(v) => out.push(v),
                Err(e) => {
                    self.issue(key, e);
                    return None;
                }
            }
        }
        Some(out)
    }

    fn state(&mut self, key: &str, default: StateSpec) -> StateSpec {
        let Some(raw) = self.raw(key) else { return default };
        match parse_state(&raw) {
            Ok(s) => s,
            Err(e) => {
                self.issue(key, e);
                default
            }
        }
    }
}

fn parse_list(raw: &str) -> Result<Vec<f64>, String> {
    let items: Vec<&str> = raw.split([',', ' ', '\t']).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err("expected a non-empty list of numbers".into());
    }
    items
        .iter()
        .map(|s| match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(format!("`{s}` is not a finite number")),
        })
        .collect()
}

fn parse_state(raw: &str) -> Result<StateSpec, String> {
    if let Some(v) = raw.strip_prefix("constant:") {
        return v
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(StateSpec::Constant)
            .ok_or_else(|| format!("`{raw}` needs a finite constant"));
    }
    if let Some(rest) = raw.strip_prefix("eigen:") {
        let mut parts = rest.split(':');
        let index = parts.next().and_then(|s| s.trim().parse::<usize>().ok());
        let scale = parts.next().and_then(|s| s.trim().parse::<f64>().ok()).filter(|v| v.is_finite());
        return match (index, scale, parts.next()) {
            (Some(index), Some(scale), None) => Ok(StateSpec::Eigen { index, scale }),
            _ => Err(format!("`{raw}` must read eigen:<index>:<scale>")),
        };
    }
    parse_list(raw).map(StateSpec::Values)
}

fn fmt_list(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(", ")
}

fn fmt_state(s: &StateSpec) -> String {
    match s {
        StateSpec::Values(v) => fmt_list(v),
        StateSpec::Constant(c) => format!("constant:{c:?}"),
        StateSpec::Eigen { index, scale } => format!("eigen:{index}:{scale:?}"),
    }
}

/// Parses a line-oriented `section.key = value` document, collecting every
/// syntax and semantic problem rather than stopping at the first.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, Vec<ConfigIssue>> {
    let mut reader = Reader {
        entries: BTreeMap::new(),
        issues: Vec::new(),
    };
    for (i, raw_line) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            reader.issues.push(ConfigIssue {
                line: Some(line),
                field: None,
                message: format!("expected `section.key = value`, got `{content}`"),
            });
            continue;
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        let well_formed = key.split_once('.').is_some_and(|(s, k)| {
            !s.is_empty() && !k.is_empty() && key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
        });
        let issue = if !well_formed {
            Some(format!("malformed key `{key}`"))
        } else if !KNOWN_KEYS.contains(&key.as_str()) {
            Some("unknown key".to_string())
        } else if value.is_empty() {
            Some("missing value".to_string())
        } else if let Some(prev) = reader.entries.get(&key) {
            Some(format!("duplicate key (first set on line {})", prev.line))
        } else {
            None
        };
        match issue {
            Some(message) => reader.issues.push(ConfigIssue {
                line: Some(line),
                field: Some(key),
                message,
            }),
            None => {
                reader.entries.insert(key, Entry { line, value });
            }
        }
    }

    let experiment = match reader.raw("experiment.kind") {
        Some(s) => match ExperimentKind::parse(&s) {
            Some(k) => Some(k),
            None => {
                let names: Vec<_> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
                reader.issue("experiment.kind", format!("unknown experiment `{s}`, expected one of {}", names.join(", ")));
                None
            }
        },
        None => {
            reader.issues.push(ConfigIssue {
                line: None,
                field: Some("experiment.kind".into()),
                message: "missing experiment selector".into(),
            });
            None
        }
    };

    if let Some(kind) = experiment {
        for block in kind.required_blocks() {
            if !reader.has_block(block) {
                reader.issues.push(ConfigIssue {
                    line: None,
                    field: Some((*block).to_string()),
                    message: format!("missing {block} block required by the {} experiment", kind.name()),
                });
            }
        }
    }

    let space = parse_space(&mut reader);
    let fractional = reader.f64_opt("space.fractional");
    if let Some(a) = fractional {
        if !(a > 0.0 && a < 1.0) {
            reader.issue("space.fractional", format!("fractional exponent must lie in (0,1), got {a}"));
        }
    }
    let potential = parse_potential(&mut reader);
    let noise = parse_noise(&mut reader);
    let run = parse_run(&mut reader, experiment);
    let svi = parse_svi(&mut reader);
    let contraction = ContractionSpec {
        offset: reader.state("contraction.offset", StateSpec::Eigen { index: 0, scale: 1.0 }),
    };
    let assumptions_grid = reader.list("assumptions.grid");
    let norms_samples = reader.usize_or("norms.samples", 100);
    if norms_samples == 0 {
        reader.issue("norms.samples", "sample count must be positive");
    }

    // dimension checks that need both the space and a state
    if let Some(n) = space.as_ref().and_then(explicit_nodes) {
        for (key, s) in [
            ("run.initial", &run.initial),
            ("svi.constant", &svi.constant),
            ("svi.test_initial", &svi.test_initial),
            ("contraction.offset", &contraction.offset),
        ] {
            if let StateSpec::Values(v) = s {
                if v.len() != n {
                    reader.issue(key, format!("has {} entries for {n} nodes", v.len()));
                }
            }
        }
    }

    if !reader.issues.is_empty() {
        reader.issues.sort_by_key(|i| (i.line.unwrap_or(usize::MAX), i.field.clone()));
        return Err(reader.issues);
    }
    Ok(ExperimentConfig {
        experiment: experiment.expect("checked above"),
        space,
        fractional,
        potential,
        noise,
        run,
        svi,
        contraction,
        assumptions_grid,
        norms_samples,
    })
}

/// Sample grid of the assumptions experiment when none is configured.
pub fn default_grid() -> Vec<f64> {
    (0..=400).map(|i| -10.0 + 0.05 * i as f64).collect()
}

fn explicit_nodes(space: &SpaceSpec) -> Option<usize> {
    match space {
        SpaceSpec::Graph { measure, .. } => Some(measure.len()),
        SpaceSpec::Preset(name) => match Preset::parse(name).ok()?.graph {
            super::PresetGraph::Single => Some(1),
            super::PresetGraph::Path(n) | super::PresetGraph::Complete(n) => Some(n),
        },
    }
}

fn parse_space(r: &mut Reader) -> Option<SpaceSpec> {
    if !r.has_block("space") {
        return None;
    }
    if let Some(name) = r.raw("space.preset") {
        for key in ["space.weights", "space.killing", "space.measure"] {
            if r.entries.contains_key(key) {
                r.issue(key, "cannot be combined with space.preset");
            }
        }
        if let Err(e) = Preset::parse(&name) {
            r.issue("space.preset", e);
        }
        return Some(SpaceSpec::Preset(name));
    }
    let weights = r.rows("space.weights");
    let killing = r.list("space.killing");
    let measure = r.list("space.measure");
    let mut missing = false;
    for (key, present) in [
        ("space.weights", weights.is_some()),
        ("space.killing", killing.is_some()),
        ("space.measure", measure.is_some()),
    ] {
        if !present && !r.entries.contains_key(key) {
            r.issues.push(ConfigIssue {
                line: None,
                field: Some(key.into()),
                message: "required when no preset is given".into(),
            });
        }
        missing |= !present;
    }
    if missing {
        return None;
    }
    let (weights, killing, measure) = (weights?, killing?, measure?);
    let n = measure.len();
    if weights.len() != n || weights.iter().any(|row| row.len() != n) {
        r.issue("space.weights", format!("must be a {n} x {n} matrix"));
    }
    if killing.len() != n {
        r.issue("space.killing", format!("has {} entries for {n} nodes", killing.len()));
    }
    Some(SpaceSpec::Graph { weights, killing, measure })
}

fn parse_potential(r: &mut Reader) -> Option<PotentialSpec> {
    if !r.has_block("potential") {
        return None;
    }
    let Some(kind) = r.raw("potential.kind") else {
        r.issues.push(ConfigIssue {
            line: None,
            field: Some("potential.kind".into()),
            message: "missing potential kind".into(),
        });
        return None;
    };
    match kind.as_str() {
        "fast_diffusion" => {
            let theta = r.f64_or("potential.theta", 0.5);
            if !(theta > 0.0 && theta < 1.0) {
                r.issue("potential.theta", format!("theta must lie in (0,1), got {theta}"));
            }
            Some(PotentialSpec::FastDiffusion { theta })
        }
        "porous_medium" => {
            let gamma = r.f64_or("potential.gamma", 2.0);
            if !(gamma > 1.0) {
                r.issue("potential.gamma", format!("gamma must exceed 1, got {gamma}"));
            }
            Some(PotentialSpec::PorousMedium { gamma })
        }
        "zhang" => Some(PotentialSpec::Zhang),
        "piecewise" => {
            let breakpoints = r.list("potential.breakpoints").unwrap_or_default();
            let rows = r.rows("potential.pieces").unwrap_or_default();
            if rows.is_empty() {
                r.issue("potential.pieces", "piecewise potential needs `a b c; …` pieces");
            }
            let mut pieces = Vec::with_capacity(rows.len());
            for row in rows {
                match <[f64; 3]>::try_from(row.as_slice()) {
                    Ok(p) => pieces.push(p),
                    Err(_) => {
                        r.issue("potential.pieces", "each piece needs exactly three coefficients");
                        break;
                    }
                }
            }
            if let Err(e) = crate::monotone::ConvexPotential::piecewise(breakpoints.clone(), pieces.clone()) {
                r.issue("potential.pieces", e.to_string());
            }
            Some(PotentialSpec::Piecewise { breakpoints, pieces })
        }
        other => {
            r.issue("potential.kind", format!("unknown potential `{other}`"));
            None
        }
    }
}

fn parse_noise(r: &mut Reader) -> Option<NoiseSpec> {
    if !r.has_block("noise") {
        return None;
    }
    let kind = r.raw("noise.kind").unwrap_or_else(|| "diagonal".into());
    match kind.as_str() {
        "zero" => Some(NoiseSpec::Zero),
        "diagonal" => {
            let sigma = r.f64_or("noise.sigma", 0.2);
            let clip = r.f64_or("noise.clip", DEFAULT_CLIP);
            if !(sigma >= 0.0) {
                r.issue("noise.sigma", format!("sigma must be nonnegative, got {sigma}"));
            }
            if !(clip > 0.0) {
                r.issue("noise.clip", format!("clip must be positive, got {clip}"));
            }
            Some(NoiseSpec::Diagonal { sigma, clip })
        }
        "additive" => match r.rows("noise.columns") {
            Some(columns) => Some(NoiseSpec::Additive { columns }),
            None => {
                r.issue("noise.columns", "additive noise needs `noise.columns`");
                None
            }
        },
        other => {
            r.issue("noise.kind", format!("unknown noise `{other}`"));
            None
        }
    }
}

fn epsilon_ok(eps: f64) -> bool {
    eps > 0.0 && eps < 1.0
}

fn parse_run(r: &mut Reader, experiment: Option<ExperimentKind>) -> RunSpec {
    let list_mode = experiment.is_some_and(|k| k.uses_epsilon_list());
    let epsilon = r.f64_or("run.epsilon", DEFAULT_EPSILON);
    if !epsilon_ok(epsilon) {
        r.issue("run.epsilon", format!("epsilon must lie in (0,1), got {epsilon}"));
    }
    let epsilon_list = r.list("run.epsilon_list").unwrap_or_else(|| DEFAULT_EPSILON_LIST.to_vec());
    if epsilon_list.iter().any(|&e| !epsilon_ok(e)) {
        r.issue("run.epsilon_list", "epsilon must lie in (0,1) for every entry");
    }
    if list_mode && !epsilon_list.windows(2).all(|w| w[1] < w[0]) {
        r.issue("run.epsilon_list", "must be strictly decreasing");
    }
    let min_len = if experiment == Some(ExperimentKind::EpsConvergence) { 3 } else { 1 };
    if list_mode && epsilon_list.len() < min_len {
        r.issue("run.epsilon_list", format!("needs at least {min_len} values"));
    }
    let horizon = r.f64_or("run.horizon", 1.0);
    if !(horizon > 0.0) {
        r.issue("run.horizon", format!("horizon must be positive, got {horizon}"));
    }
    let steps = r.usize_or("run.steps", 64);
    if steps == 0 {
        r.issue("run.steps", "step count must be positive");
    }
    let paths = r.usize_or("run.paths", 200);
    if paths == 0 {
        r.issue("run.paths", "path count must be positive");
    }
    let seed = match r.raw("run.seed") {
        Some(raw) => raw.parse::<u64>().unwrap_or_else(|_| {
            r.issue("run.seed", format!("expected an unsigned integer, got `{raw}`"));
            0
        }),
        None => 0,
    };
    let tag = r.raw("run.tag").unwrap_or_else(|| "main".into());
    let initial = r.state("run.initial", StateSpec::Constant(1.0));
    let k_weight = r.f64_opt("run.k_weight");
    if let Some(k) = k_weight {
        if !(k >= 0.0) {
            r.issue("run.k_weight", format!("weight must be nonnegative, got {k}"));
        }
    }
    let write_trajectories = match r.raw("run.write_trajectories").as_deref() {
        None | Some("true") => true,
        Some("false") => false,
        Some(other) => {
            r.issue("run.write_trajectories", format!("expected true or false, got `{other}`"));
            true
        }
    };
    RunSpec {
        epsilon,
        epsilon_list,
        horizon,
        steps,
        paths,
        seed,
        tag,
        initial,
        k_weight,
        write_trajectories,
    }
}

const DRIFT_NAMES: [&str; 3] = ["zero", "constant", "from_regularized"];

fn parse_svi(r: &mut Reader) -> SviSpec {
    let drifts: Vec<String> = match r.raw("svi.drifts") {
        Some(raw) => raw.split([',', ' ']).filter(|s| !s.is_empty()).map(str::to_string).collect(),
        None => DRIFT_NAMES.iter().map(|s| s.to_string()).collect(),
    };
    for d in &drifts {
        if !DRIFT_NAMES.contains(&d.as_str()) {
            r.issue("svi.drifts", format!("unknown test drift `{d}`"));
        }
    }
    if drifts.is_empty() {
        r.issue("svi.drifts", "needs at least one test drift");
    }
    let c = r.f64_opt("svi.c");
    if let Some(c) = c {
        if !(c > 0.0) {
            r.issue("svi.c", format!("constant must be positive, got {c}"));
        }
    }
    SviSpec {
        drifts,
        constant: r.state("svi.constant", StateSpec::Constant(0.5)),
        test_initial: r.state("svi.test_initial", StateSpec::Constant(0.5)),
        c,
    }
}

/// Canonical text form; `parse_config(serialize(c)) == c`.
pub fn serialize(c: &ExperimentConfig) -> String {
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(s, "{k} = {v}");
    };
    kv("experiment.kind", c.experiment.name().into());
    match &c.space {
        Some(SpaceSpec::Preset(name)) => kv("space.preset", name.clone()),
        Some(SpaceSpec::Graph { weights, killing, measure }) => {
            kv("space.weights", weights.iter().map(|r| fmt_list(r)).collect::<Vec<_>>().join("; "));
            kv("space.killing", fmt_list(killing));
            kv("space.measure", fmt_list(measure));
        }
        None => {}
    }
    if let Some(a) = c.fractional {
        kv("space.fractional", format!("{a:?}"));
    }
    match &c.potential {
        Some(PotentialSpec::FastDiffusion { theta }) => {
            kv("potential.kind", "fast_diffusion".into());
            kv("potential.theta", format!("{theta:?}"));
        }
        Some(PotentialSpec::PorousMedium { gamma }) => {
            kv("potential.kind", "porous_medium".into());
            kv("potential.gamma", format!("{gamma:?}"));
        }
        Some(PotentialSpec::Zhang) => kv("potential.kind", "zhang".into()),
        Some(PotentialSpec::Piecewise { breakpoints, pieces }) => {
            kv("potential.kind", "piecewise".into());
            kv("potential.breakpoints", fmt_list(breakpoints));
            kv("potential.pieces", pieces.iter().map(|p| fmt_list(p)).collect::<Vec<_>>().join("; "));
        }
        None => {}
    }
    match &c.noise {
        Some(NoiseSpec::Zero) => kv("noise.kind", "zero".into()),
        Some(NoiseSpec::Diagonal { sigma, clip }) => {
            kv("noise.kind", "diagonal".into());
            kv("noise.sigma", format!("{sigma:?}"));
            kv("noise.clip", format!("{clip:?}"));
        }
        Some(NoiseSpec::Additive { columns }) => {
            kv("noise.kind", "additive".into());
            kv("noise.columns", columns.iter().map(|r| fmt_list(r)).collect::<Vec<_>>().join("; "));
        }
        None => {}
    }
    let r = &c.run;
    kv("run.epsilon", format!("{:?}", r.epsilon));
    kv("run.epsilon_list", fmt_list(&r.epsilon_list));
    kv("run.horizon", format!("{:?}", r.horizon));
    kv("run.steps", r.steps.to_string());
    kv("run.paths", r.paths.to_string());
    kv("run.seed", r.seed.to_string());
    kv("run.tag", r.tag.clone());
    kv("run.initial", fmt_state(&r.initial));
    if let Some(k) = r.k_weight {
        kv("run.k_weight", format!("{k:?}"));
    }
    kv("run.write_trajectories", r.write_trajectories.to_string());
    kv("svi.drifts", c.svi.drifts.join(", "));
    kv("svi.constant", fmt_state(&c.svi.constant));
    kv("svi.test_initial", fmt_state(&c.svi.test_initial));
    if let Some(v) = c.svi.c {
        kv("svi.c", format!("{v:?}"));
    }
    kv("contraction.offset", fmt_state(&c.contraction.offset));
    if let Some(g) = &c.assumptions_grid {
        kv("assumptions.grid", fmt_list(g));
    }
    kv("norms.samples", c.norms_samples.to_string());
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "experiment.kind = svi\nspace.preset = single\npotential.kind = zhang\nnoise.kind = zero\n";

    #[test]
    fn minimal_config_fills_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.run.epsilon, DEFAULT_EPSILON);
        assert_eq!(c.run.steps, 64);
        assert_eq!(c.run.paths, 200);
        assert_eq!(c.run.tag, "main");
        assert_eq!(c.svi.drifts.len(), 3);
    }

    #[test]
    fn epsilon_out_of_range() {
        let text = format!("{MINIMAL}run.epsilon = 1.5\n");
        let errs = parse_config(&text).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert!(errs[0].message.contains("epsilon must lie in (0,1)"));
        assert_eq!(errs[0].line, Some(5));
        assert_eq!(errs[0].field.as_deref(), Some("run.epsilon"));
    }

    #[test]
    fn missing_noise_block_is_named() {
        let errs = parse_config("experiment.kind = svi\nspace.preset = single\npotential.kind = zhang\n").unwrap_err();
        assert!(errs.iter().any(|e| e.field.as_deref() == Some("noise") && e.message.contains("noise block")));
    }

    #[test]
    fn every_problem_is_listed() {
        let text = "experiment.kind = svi\nspace.preset = torus\nbogus line\npotential.kind = zhang\nnoise.sigma = -1\nrun.steps = x\nrun.steps = 3\nfoo.bar = 1\n";
        let errs = parse_config(text).unwrap_err();
        let joined: Vec<String> = errs.iter().map(|e| e.to_string()).collect();
        assert!(errs.len() >= 6, "{joined:?}");
        for needle in ["line 2", "line 3", "line 5", "line 6", "line 7", "line 8"] {
            assert!(joined.iter().any(|e| e.starts_with(needle)), "{needle} in {joined:?}");
        }
    }

    #[test]
    fn serialization_round_trips() {
        let text = "# c\nexperiment.kind = eps_convergence\nspace.weights = 0 1; 1 0\nspace.killing = 1, 0\nspace.measure = 1 1\nspace.fractional = 0.5\npotential.kind = piecewise\npotential.breakpoints = 0\npotential.pieces = 0 0 0; 0.5 1 0\nnoise.kind = additive\nnoise.columns = 0.1 0.2\nrun.initial = eigen:1:2\nrun.k_weight = 0\n";
        let c = parse_config(text).unwrap();
        let once = serialize(&c);
        let back = parse_config(&once).unwrap();
        assert_eq!(back, c);
        assert_eq!(serialize(&back), once);
    }
}
