use nalgebra::{DMatrix, DVector};

use super::SimError;
use crate::dirichlet::DirichletSpace;

/// Default clipping level of the multiplicative state factor.
pub const DEFAULT_CLIP: f64 = 1e3;

/// Dual-norm parameters at which the growth and Lipschitz constants are sampled,
/// in addition to the `ν → 0` limit.
pub const NU_GRID: [f64; 4] = [1.0, 0.5, 0.1, 0.01];

/// Relative spread of per-ν constants above which they are flagged as non-uniform.
pub const UNIFORMITY_TOL: f64 = 0.05;

const MIN_PAIRS: usize = 100;

/// Finite-rank noise coefficient `B(u) : ℝ^m → ℝ^E`.
#[derive(Clone, Debug, PartialEq)]
pub enum NoiseModel {
    /// State-independent columns, one per mode.
    Additive { columns: DMatrix<f64> },
    /// `B(u) e_k = σ · clamp(u_k, ±clip) · 𝟙_k`, one mode per node.
    DiagonalMultiplicative { sigma: f64, clip: f64, nodes: usize },
    /// `B(u) e_k = A_k u + b_k`.
    LinearCombination {
        maps: Vec<DMatrix<f64>>,
        offsets: Vec<DVector<f64>>,
    },
}

impl NoiseModel {
    pub fn zero(nodes: usize) -> Self {
        NoiseModel::Additive {
            columns: DMatrix::zeros(nodes, 1),
        }
    }

    pub fn diagonal(sigma: f64, clip: f64, nodes: usize) -> Result<Self, SimError> {
        if !sigma.is_finite() || !(clip >= 0.0) || !clip.is_finite() {
            return Err(SimError::InvalidConfig(format!(
                "diagonal noise needs finite sigma and finite clip >= 0, got sigma = {sigma}, clip = {clip}"
            )));
        }
        Ok(NoiseModel::DiagonalMultiplicative { sigma, clip, nodes })
    }

    pub fn linear(maps: Vec<DMatrix<f64>>, offsets: Vec<DVector<f64>>) -> Result<Self, SimError> {
        if maps.is_empty() || maps.len() != offsets.len() {
            return Err(SimError::InvalidConfig(
                "linear noise needs one offset per map and at least one mode".into(),
            ));
        }
        let n = offsets[0].len();
        if maps.iter().any(|a| a.nrows() != n || a.ncols() != n) || offsets.iter().any(|b| b.len() != n) {
            return Err(SimError::InvalidConfig("linear noise maps must be square node maps".into()));
        }
        Ok(NoiseModel::LinearCombination { maps, offsets })
    }

    pub fn mode_count(&self) -> usize {
        match self {
            NoiseModel::Additive { columns } => columns.ncols(),
            NoiseModel::DiagonalMultiplicative { nodes, .. } => *nodes,
            NoiseModel::LinearCombination { maps, .. } => maps.len(),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            NoiseModel::Additive { columns } => columns.nrows(),
            NoiseModel::DiagonalMultiplicative { nodes, .. } => *nodes,
            NoiseModel::LinearCombination { offsets, .. } => offsets[0].len(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NoiseModel::Additive { .. } => "additive",
            NoiseModel::DiagonalMultiplicative { .. } => "diagonal",
            NoiseModel::LinearCombination { .. } => "linear",
        }
    }

    /// True when `B` vanishes identically.
    pub fn is_zero(&self) -> bool {
        match self {
            NoiseModel::Additive { columns } => columns.iter().all(|&c| c == 0.0),
            NoiseModel::DiagonalMultiplicative { sigma, clip, .. } => *sigma == 0.0 || *clip == 0.0,
            NoiseModel::LinearCombination { maps, offsets } => {
                maps.iter().all(|a| a.iter().all(|&c| c == 0.0)) && offsets.iter().all(|b| b.iter().all(|&c| c == 0.0))
            }
        }
    }

    /// Matrix of `B(u)` with one column per mode.
    pub fn operator(&self, u: &DVector<f64>) -> DMatrix<f64> {
        match self {
            NoiseModel::Additive { columns } => columns.clone(),
            NoiseModel::DiagonalMultiplicative { sigma, clip, nodes } => {
                DMatrix::from_diagonal(&DVector::from_fn(*nodes, |k, _| sigma * u[k].clamp(-clip, *clip)))
            }
            NoiseModel::LinearCombination { maps, offsets } => {
                let cols: Vec<DVector<f64>> = maps.iter().zip(offsets).map(|(a, b)| a * u + b).collect();
                DMatrix::from_columns(&cols)
            }
        }
    }

    /// `B(u) dW`.
    pub fn apply(&self, u: &DVector<f64>, dw: &DVector<f64>) -> DVector<f64> {
        match self {
            NoiseModel::Additive { columns } => columns * dw,
            NoiseModel::DiagonalMultiplicative { sigma, clip, nodes } => {
                DVector::from_fn(*nodes, |k, _| sigma * u[k].clamp(-clip, *clip) * dw[k])
            }
            NoiseModel::LinearCombination { maps, offsets } => {
                let mut out = DVector::zeros(offsets[0].len());
                for ((a, b), w) in maps.iter().zip(offsets).zip(dw.iter()) {
                    out += (a * u + b) * *w;
                }
                out
            }
        }
    }
}

/// Empirical constants of the Lipschitz and growth bounds at one dual-norm level.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseLevel {
    /// `None` stands for the extended dual norm, the `ν → 0` limit.
    pub nu: Option<f64>,
    pub lipschitz: f64,
    pub growth: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseCertificate {
    pub pairs: usize,
    pub levels: Vec<NoiseLevel>,
    /// Largest Lipschitz constant over all levels.
    pub c1: f64,
    /// Largest dual-norm growth constant over all levels.
    pub c2: f64,
    /// `L²(μ)` growth constant.
    pub c3: f64,
    pub c1_uniform: bool,
    pub c2_uniform: bool,
}

fn spread_ok(values: impl Iterator<Item = f64>) -> bool {
    let (lo, hi) = values.fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    hi == 0.0 || hi <= lo * (1.0 + UNIFORMITY_TOL)
}

/// Smallest constants consistent with every sample and every pair of samples.
pub fn certify_noise(
    model: &NoiseModel,
    space: &DirichletSpace,
    samples: &[DVector<f64>],
) -> Result<NoiseCertificate, SimError> {
    let pairs = samples.len() * samples.len().saturating_sub(1) / 2;
    if pairs < MIN_PAIRS {
        return Err(SimError::InvalidConfig(format!(
            "noise certification needs at least {MIN_PAIRS} sample pairs, got {pairs}"
        )));
    }
    let n = space.node_count();
    if model.node_count() != n || samples.iter().any(|s| s.len() != n) {
        return Err(SimError::DimensionMismatch {
            expected: n,
            got: model.node_count(),
        });
    }

    let eigen = space.eigenvalues();
    let dual_sq = |v: &DVector<f64>, nu: f64| -> f64 {
        space
            .coefficients(v)
            .iter()
            .zip(eigen.iter())
            .map(|(c, l)| c * c / (nu + l))
            .sum()
    };
    let hs_sq = |b: &DMatrix<f64>, nu: f64| -> f64 { b.column_iter().map(|c| dual_sq(&c.into_owned(), nu)).sum() };

    let ops: Vec<DMatrix<f64>> = samples.iter().map(|s| model.operator(s)).collect();
    let mut levels = Vec::new();
    for nu in NU_GRID.iter().map(|&v| Some(v)).chain(std::iter::once(None)) {
        let level = nu.unwrap_or(0.0);
        let mut lipschitz: f64 = 0.0;
        for i in 0..samples.len() {
            for j in (i + 1)..samples.len() {
                let den = dual_sq(&(&samples[i] - &samples[j]), level);
                if den > 0.0 {
                    lipschitz = lipschitz.max(hs_sq(&(&ops[i] - &ops[j]), level) / den);
                }
            }
        }
        let growth = samples
            .iter()
            .zip(&ops)
            .map(|(s, b)| hs_sq(b, level) / (dual_sq(s, level) + 1.0))
            .fold(0.0, f64::max);
        levels.push(NoiseLevel { nu, lipschitz, growth });
    }

    let c3 = samples
        .iter()
        .zip(&ops)
        .map(|(s, b)| {
            let hs: f64 = b.column_iter().map(|c| space.l2_inner(&c.into_owned(), &c.into_owned())).sum();
            hs / (space.l2_inner(s, s) + 1.0)
        })
        .fold(0.0, f64::max);

    Ok(NoiseCertificate {
        pairs,
        c1: levels.iter().map(|l| l.lipschitz).fold(0.0, f64::max),
        c2: levels.iter().map(|l| l.growth).fold(0.0, f64::max),
        c3,
        c1_uniform: spread_ok(levels.iter().map(|l| l.lipschitz)),
        c2_uniform: spread_ok(levels.iter().map(|l| l.growth)),
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_node() -> DirichletSpace {
        let w = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        DirichletSpace::build_graph_space(&w, &[1.0, 0.0], &[1.0, 1.0]).unwrap()
    }

    fn samples() -> Vec<DVector<f64>> {
        (0..16)
            .map(|i| {
                let x = i as f64;
                DVector::from_vec(vec![(0.7 * x).sin() * 3.0, (1.3 * x + 0.5).cos() * 2.0 - 0.4])
            })
            .collect()
    }

    #[test]
    fn additive_is_not_lipschitz_sensitive() {
        let model = NoiseModel::Additive {
            columns: DMatrix::from_row_slice(2, 1, &[0.5, -0.25]),
        };
        let cert = certify_noise(&model, &two_node(), &samples()).unwrap();
        assert_eq!(cert.c1, 0.0);
        assert!(cert.c2 > 0.0 && cert.c3 > 0.0);
        assert!(cert.c1_uniform);
    }

    #[test]
    fn zero_diagonal_noise_has_zero_constants() {
        let cert = certify_noise(&NoiseModel::diagonal(0.0, DEFAULT_CLIP, 2).unwrap(), &two_node(), &samples()).unwrap();
        assert_eq!((cert.c1, cert.c2, cert.c3), (0.0, 0.0, 0.0));
    }

    #[test]
    fn diagonal_constants_are_finite() {
        let model = NoiseModel::diagonal(0.3, DEFAULT_CLIP, 2).unwrap();
        let cert = certify_noise(&model, &two_node(), &samples()).unwrap();
        assert_eq!(cert.levels.len(), NU_GRID.len() + 1);
        assert!(cert.c1.is_finite() && cert.c1 > 0.0);
        // σ² bounds the L² growth constant for the diagonal model
        assert!(cert.c3 <= 0.09 + 1e-15);
    }

    #[test]
    fn apply_matches_operator() {
        let model = NoiseModel::linear(
            vec![DMatrix::identity(2, 2) * 0.2, DMatrix::from_row_slice(2, 2, &[0.0, 0.1, 0.1, 0.0])],
            vec![DVector::from_vec(vec![1.0, 0.0]), DVector::zeros(2)],
        )
        .unwrap();
        let u = DVector::from_vec(vec![0.3, -2.0]);
        let dw = DVector::from_vec(vec![0.7, -0.1]);
        let diff = model.apply(&u, &dw) - model.operator(&u) * &dw;
        assert!(diff.amax() < 1e-15);
        let clipped = NoiseModel::diagonal(1.0, 0.5, 2).unwrap().apply(&u, &DVector::from_element(2, 1.0));
        assert_eq!(clipped, DVector::from_vec(vec![0.3, -0.5]));
    }

    #[test]
    fn too_few_samples_are_rejected() {
        assert!(certify_noise(&NoiseModel::zero(2), &two_node(), &samples()[..5]).is_err());
    }
}
