use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{BernsteinFunction, DirichletError};

const SYMMETRY_TOL: f64 = 1e-12;
const EIGEN_RESIDUAL_TOL: f64 = 1e-10;
const SIGN_TOL: f64 = 1e-12;

/// A bounded linear functional `u ↦ Σ_i u_i v_i μ_i`, stored by its density `v`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualFunctional {
    pub density: DVector<f64>,
}

impl DualFunctional {
    pub fn new(density: DVector<f64>) -> Self {
        DualFunctional { density }
    }

    pub fn zeros(n: usize) -> Self {
        DualFunctional {
            density: DVector::zeros(n),
        }
    }

    /// Evaluates the functional on `u` with respect to the measure `mu`.
    pub fn apply(&self, mu: &DVector<f64>, u: &DVector<f64>) -> f64 {
        self.density
            .iter()
            .zip(u.iter())
            .zip(mu.iter())
            .map(|((v, u), m)| v * u * m)
            .sum()
    }
}

/// Operator norm selectors for `P_t : L^p(μ) → L^q(μ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormPair {
    OneToTwo,
    TwoToInf,
    OneToInf,
}

impl NormPair {
    pub fn from_exponents(p: u32, q: Option<u32>) -> Result<Self, DirichletError> {
        match (p, q) {
            (1, Some(2)) => Ok(NormPair::OneToTwo),
            (2, None) => Ok(NormPair::TwoToInf),
            (1, None) => Ok(NormPair::OneToInf),
            _ => Err(DirichletError::UnsupportedNormPair {
                p,
                q: q.map(|q| q.to_string()).unwrap_or_else(|| "inf".into()),
            }),
        }
    }
}

/// Finite measure space with a μ-symmetric sub-Markovian generator and its
/// spectral decomposition.
///
/// `basis` holds a μ-orthonormal eigenbasis in its columns, so that
/// `h(−L) v = Φ diag(h(λ)) Φᵀ M v` for any spectral multiplier `h`.
#[derive(Clone, Debug)]
pub struct DirichletSpace {
    measure: DVector<f64>,
    generator: DMatrix<f64>,
    eigenvalues: DVector<f64>,
    basis: DMatrix<f64>,
    // M (−L)^{-1}: Gram matrix of the 𝓕_e^* inner product on densities
    fe_star_gram: DMatrix<f64>,
    witness: DVector<f64>,
}

impl DirichletSpace {
    /// Builds the generator `(Lu)_i = (1/μ_i)[Σ_j w_ij (u_j − u_i) − k_i u_i]`
    /// of a weighted graph with killing.
    pub fn build_graph_space(
        edge_weights: &DMatrix<f64>,
        killing_rates: &[f64],
        measure: &[f64],
    ) -> Result<Self, DirichletError> {
        let n = measure.len();
        if n == 0 {
            return Err(DirichletError::Empty);
        }
        if edge_weights.nrows() != n || edge_weights.ncols() != n {
            return Err(DirichletError::DimensionMismatch {
                expected: n,
                got: edge_weights.nrows().max(edge_weights.ncols()),
            });
        }
        if killing_rates.len() != n {
            return Err(DirichletError::DimensionMismatch {
                expected: n,
                got: killing_rates.len(),
            });
        }
        for (i, &m) in measure.iter().enumerate() {
            if !(m > 0.0 && m.is_finite()) {
                return Err(DirichletError::NonPositiveMeasure { node: i, value: m });
            }
        }
        for (i, &k) in killing_rates.iter().enumerate() {
            if !(k >= 0.0 && k.is_finite()) {
                return Err(DirichletError::NegativeKilling { node: i, value: k });
            }
        }
        for i in 0..n {
            if edge_weights[(i, i)] != 0.0 {
                return Err(DirichletError::NonzeroDiagonal { node: i });
            }
            for j in 0..n {
                let w = edge_weights[(i, j)];
                if !(w >= 0.0 && w.is_finite()) {
                    return Err(DirichletError::NegativeWeight { i, j, value: w });
                }
                let wt = edge_weights[(j, i)];
                if (w - wt).abs() > SYMMETRY_TOL * w.abs().max(wt.abs()).max(1.0) {
                    return Err(DirichletError::AsymmetricWeights { i, j });
                }
            }
        }
        for component in connected_components(edge_weights) {
            if component.iter().all(|&i| killing_rates[i] == 0.0) {
                return Err(DirichletError::NotTransient { component });
            }
        }

        let mut generator = DMatrix::zeros(n, n);
        for i in 0..n {
            let mut degree = killing_rates[i];
            for j in 0..n {
                if j != i {
                    generator[(i, j)] = edge_weights[(i, j)] / measure[i];
                    degree += edge_weights[(i, j)];
                }
            }
            generator[(i, i)] = -degree / measure[i];
        }
        Self::from_generator(DVector::from_column_slice(measure), generator)
    }

    /// Diagonalizes a μ-symmetric generator through `M^{1/2}(−L)M^{-1/2}`.
    pub fn from_generator(measure: DVector<f64>, generator: DMatrix<f64>) -> Result<Self, DirichletError> {
        let n = measure.len();
        let sqrt_mu = measure.map(f64::sqrt);
        let mut sym = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let a = measure[i] * generator[(i, j)];
                let b = measure[j] * generator[(j, i)];
                if (a - b).abs() > SYMMETRY_TOL * a.abs().max(b.abs()).max(f64::MIN_POSITIVE) {
                    return Err(DirichletError::NotSymmetric { i, j });
                }
                // symmetrized entry of M^{1/2}(−L)M^{-1/2} = M^{-1/2}(−ML)M^{-1/2}
                sym[(i, j)] = -0.5 * (a + b) / (sqrt_mu[i] * sqrt_mu[j]);
            }
        }
        let eig = SymmetricEigen::new(sym);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
        let basis = DMatrix::from_fn(n, n, |i, k| eig.eigenvectors[(i, order[k])] / sqrt_mu[i]);

        let scale = generator.amax().max(f64::MIN_POSITIVE);
        let residual = (-&generator * &basis - &basis * DMatrix::from_diagonal(&eigenvalues)).amax();
        if residual > EIGEN_RESIDUAL_TOL * scale {
            return Err(DirichletError::SpectralResidual { residual });
        }
        let lambda_min = eigenvalues[0];
        if !(lambda_min > 1e-14 * scale) {
            return Err(DirichletError::NotTransient {
                component: (0..n).collect(),
            });
        }
        Ok(Self::assemble(measure, generator, eigenvalues, basis))
    }

    fn assemble(
        measure: DVector<f64>,
        generator: DMatrix<f64>,
        eigenvalues: DVector<f64>,
        basis: DMatrix<f64>,
    ) -> Self {
        let n = measure.len();
        // M Φ diag(1/λ) Φᵀ M
        let weighted = DMatrix::from_fn(n, n, |i, k| measure[i] * basis[(i, k)] / eigenvalues[k].sqrt());
        let fe_star_gram = &weighted * weighted.transpose();
        let mut space = DirichletSpace {
            measure,
            generator,
            eigenvalues,
            basis,
            fe_star_gram,
            witness: DVector::zeros(n),
        };
        let one = DualFunctional::new(DVector::from_element(n, 1.0));
        let c = 1.0 / space.dual_norm_fe(&one);
        space.witness = DVector::from_element(n, c);
        space
    }

    pub fn node_count(&self) -> usize {
        self.measure.len()
    }

    pub fn measure(&self) -> &DVector<f64> {
        &self.measure
    }

    pub fn total_mass(&self) -> f64 {
        self.measure.sum()
    }

    pub fn generator(&self) -> &DMatrix<f64> {
        &self.generator
    }

    /// Eigenvalues of `−L` in ascending order.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// μ-orthonormal eigenfunctions of `−L`, one per column.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn eigenfunction(&self, k: usize) -> DVector<f64> {
        self.basis.column(k).into_owned()
    }

    pub fn witness(&self) -> &DVector<f64> {
        &self.witness
    }

    /// `M (−L)^{-1}`, so that `⟨a, b⟩_{𝓕_e^*} = aᵀ G b`.
    pub fn fe_star_gram(&self) -> &DMatrix<f64> {
        &self.fe_star_gram
    }

    fn check_dim(&self, v: &DVector<f64>) -> Result<(), DirichletError> {
        if v.len() != self.node_count() {
            return Err(DirichletError::DimensionMismatch {
                expected: self.node_count(),
                got: v.len(),
            });
        }
        Ok(())
    }

    /// Coordinates `Φᵀ M v` of `v` in the eigenbasis.
    pub fn coefficients(&self, v: &DVector<f64>) -> DVector<f64> {
        self.basis.tr_mul(&v.component_mul(&self.measure))
    }

    /// `h(−L) v` by spectral synthesis.
    pub fn spectral_apply(&self, v: &DVector<f64>, h: impl Fn(f64) -> f64) -> DVector<f64> {
        let mut c = self.coefficients(v);
        for (ck, &lk) in c.iter_mut().zip(self.eigenvalues.iter()) {
            *ck *= h(lk);
        }
        &self.basis * c
    }

    /// `⟨v, h(−L) v⟩_μ = Σ_k h(λ_k) c_k²`.
    fn spectral_quadratic(&self, v: &DVector<f64>, h: impl Fn(f64) -> f64) -> f64 {
        self.coefficients(v)
            .iter()
            .zip(self.eigenvalues.iter())
            .map(|(c, &l)| h(l) * c * c)
            .sum()
    }

    /// `Σ_i μ_i u_i v_i`.
    pub fn l2_inner(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        u.iter()
            .zip(v.iter())
            .zip(self.measure.iter())
            .map(|((a, b), m)| a * b * m)
            .sum()
    }

    pub fn l2_norm(&self, u: &DVector<f64>) -> f64 {
        self.l2_inner(u, u).sqrt()
    }

    /// `𝓔(u, v) = −Σ_i μ_i (Lu)_i v_i`.
    pub fn energy(&self, u: &DVector<f64>, v: &DVector<f64>) -> Result<f64, DirichletError> {
        self.check_dim(u)?;
        self.check_dim(v)?;
        Ok(-self.l2_inner(&(&self.generator * u), v))
    }

    /// `‖u‖_{𝓕_e} = 𝓔(u,u)^{1/2}`.
    pub fn fe_norm(&self, u: &DVector<f64>) -> Result<f64, DirichletError> {
        Ok(self.energy(u, u)?.max(0.0).sqrt())
    }

    /// `‖u‖²_{F_{1,2,ν}} = 𝓔(u,u) + ν|u|²₂`.
    pub fn f12_nu_norm(&self, u: &DVector<f64>, nu: f64) -> Result<f64, DirichletError> {
        Ok((self.energy(u, u)? + nu * self.l2_inner(u, u)).max(0.0).sqrt())
    }

    pub fn f12_norm(&self, u: &DVector<f64>) -> Result<f64, DirichletError> {
        self.f12_nu_norm(u, 1.0)
    }

    /// `P_t f = exp(tL) f`.
    pub fn semigroup_apply(&self, t: f64, f: &DVector<f64>) -> Result<DVector<f64>, DirichletError> {
        if !(t >= 0.0) {
            return Err(DirichletError::NegativeTime(t));
        }
        self.check_dim(f)?;
        if t == 0.0 {
            return Ok(f.clone());
        }
        Ok(self.spectral_apply(f, |l| (-t * l).exp()))
    }

    /// Matrix of `P_t` acting on node vectors.
    pub fn semigroup_matrix(&self, t: f64) -> Result<DMatrix<f64>, DirichletError> {
        if !(t >= 0.0) {
            return Err(DirichletError::NegativeTime(t));
        }
        Ok(self.spectral_matrix(|l| (-t * l).exp()))
    }

    /// Matrix of `h(−L)`: `Φ diag(h(λ)) Φᵀ M`.
    pub fn spectral_matrix(&self, h: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let n = self.node_count();
        let scaled = DMatrix::from_fn(n, n, |i, k| self.basis[(i, k)] * h(self.eigenvalues[k]));
        let right = DMatrix::from_fn(n, n, |k, j| self.basis[(j, k)] * self.measure[j]);
        scaled * right
    }

    /// Γ-transform `V_r w = (1 − L)^{-r/2} w`.
    pub fn gamma_transform(&self, r: f64, w: &DVector<f64>) -> Result<DVector<f64>, DirichletError> {
        if !(r > 0.0) {
            return Err(DirichletError::InvalidParameter(format!(
                "gamma transform order must be positive, got {r}"
            )));
        }
        self.check_dim(w)?;
        Ok(self.spectral_apply(w, |l| (1.0 + l).powf(-0.5 * r)))
    }

    /// `‖l‖_{F*_{1,2,ν}} = ⟨l, (ν − L)^{-1} l⟩^{1/2}`.
    pub fn dual_norm_nu(&self, l: &DualFunctional, nu: f64) -> Result<f64, DirichletError> {
        if !(nu > 0.0) {
            return Err(DirichletError::InvalidParameter(format!(
                "dual norm parameter must be positive, got {nu}"
            )));
        }
        self.check_dim(&l.density)?;
        Ok(self.spectral_quadratic(&l.density, |lk| 1.0 / (nu + lk)).max(0.0).sqrt())
    }

    /// `‖l‖_{𝓕_e^*} = ⟨l, (−L)^{-1} l⟩^{1/2}`, the ν → 0 limit of [`Self::dual_norm_nu`].
    pub fn dual_norm_fe(&self, l: &DualFunctional) -> f64 {
        self.fe_star_norm_sq(&l.density).max(0.0).sqrt()
    }

    /// Squared 𝓕_e^* norm of a density.
    pub fn fe_star_norm_sq(&self, v: &DVector<f64>) -> f64 {
        self.fe_star_inner(v, v)
    }

    /// `⟨a, b⟩_{𝓕_e^*} = Σ_i μ_i a_i ((−L)^{-1} b)_i`.
    pub fn fe_star_inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        a.dot(&(&self.fe_star_gram * b))
    }

    /// Maximizer of `l(u)` over the unit ball of `F_{1,2,ν}`.
    pub fn dual_maximizer(&self, l: &DualFunctional, nu: f64) -> Result<DVector<f64>, DirichletError> {
        let norm = self.dual_norm_nu(l, nu)?;
        if norm == 0.0 {
            return Ok(DVector::zeros(self.node_count()));
        }
        Ok(self.spectral_apply(&l.density, |lk| 1.0 / (nu + lk)) / norm)
    }

    /// `L̄u`, represented by the density `Lu`.
    pub fn apply_lbar(&self, u: &DVector<f64>) -> Result<DualFunctional, DirichletError> {
        self.check_dim(u)?;
        Ok(DualFunctional::new(&self.generator * u))
    }

    /// Space with generator `−f(−L)`, same measure and eigenbasis.
    pub fn subordinate(&self, f: &BernsteinFunction) -> Result<DirichletSpace, DirichletError> {
        if let Some(alpha) = f.alpha() {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(DirichletError::InvalidParameter(format!(
                    "Bernstein exponent must lie in (0,1), got {alpha}"
                )));
            }
        }
        let f0 = f.eval(0.0);
        if f0 != 0.0 {
            return Err(DirichletError::InvalidParameter(format!(
                "Bernstein function must vanish at 0, got f(0) = {f0}"
            )));
        }
        let eigenvalues = self.eigenvalues.map(|l| f.eval(l));
        if let Some(bad) = eigenvalues.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
            return Err(DirichletError::InvalidParameter(format!(
                "subordinated eigenvalue {bad} is not strictly positive"
            )));
        }
        let n = self.node_count();
        let scaled = DMatrix::from_fn(n, n, |i, k| -self.basis[(i, k)] * eigenvalues[k]);
        let right = DMatrix::from_fn(n, n, |k, j| self.basis[(j, k)] * self.measure[j]);
        let mut generator = scaled * right;
        // restore exact μ-symmetry lost to rounding
        for i in 0..n {
            for j in (i + 1)..n {
                let a = self.measure[i] * generator[(i, j)];
                let b = self.measure[j] * generator[(j, i)];
                let s = 0.5 * (a + b);
                generator[(i, j)] = s / self.measure[i];
                generator[(j, i)] = s / self.measure[j];
            }
        }
        let space = Self::assemble(self.measure.clone(), generator, eigenvalues, self.basis.clone());
        if f.is_builtin() {
            let defect = space.sign_defect();
            if defect > SIGN_TOL {
                return Err(DirichletError::SubMarkovViolation { defect });
            }
        }
        Ok(space)
    }

    /// Worst violation of the sub-Markov sign structure, relative to `max|L_ij|`:
    /// negative off-diagonal entries and positive row sums.
    pub fn sign_defect(&self) -> f64 {
        let n = self.node_count();
        let scale = self.generator.amax().max(f64::MIN_POSITIVE);
        let mut defect: f64 = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                let v = self.generator[(i, j)];
                row += v;
                if i != j {
                    defect = defect.max(-v);
                }
            }
            defect = defect.max(row);
        }
        defect / scale
    }

    /// `Σ_i |u_i| g_i μ_i − 𝓔(u,u)^{1/2}`, nonpositive when the witness holds.
    pub fn witness_gap(&self, u: &DVector<f64>) -> Result<f64, DirichletError> {
        let lhs: f64 = u
            .iter()
            .zip(self.witness.iter())
            .zip(self.measure.iter())
            .map(|((u, g), m)| u.abs() * g * m)
            .sum();
        Ok(lhs - self.fe_norm(u)?)
    }

    /// Exact norm of `P_t` between weighted Lebesgue spaces.
    ///
    /// `L¹(μ)` norms maximize over the extreme points `𝟙_j / μ_j`; the
    /// `L²(μ) → L^∞` norm is taken row by row.
    pub fn opnorm(&self, t: f64, pair: NormPair) -> Result<f64, DirichletError> {
        if !(t > 0.0) {
            return Err(DirichletError::InvalidParameter(format!(
                "operator norm requires t > 0, got {t}"
            )));
        }
        let n = self.node_count();
        match pair {
            NormPair::OneToTwo | NormPair::OneToInf => {
                let mut best: f64 = 0.0;
                for j in 0..n {
                    let mut e = DVector::zeros(n);
                    e[j] = 1.0 / self.measure[j];
                    let image = self.semigroup_apply(t, &e)?;
                    let norm = match pair {
                        NormPair::OneToTwo => self.l2_norm(&image),
                        _ => image.amax(),
                    };
                    best = best.max(norm);
                }
                Ok(best)
            }
            NormPair::TwoToInf => {
                let k = self.semigroup_matrix(t)?;
                let mut best: f64 = 0.0;
                for i in 0..n {
                    let row: f64 = (0..n).map(|j| k[(i, j)] * k[(i, j)] / self.measure[j]).sum();
                    best = best.max(row.sqrt());
                }
                Ok(best)
            }
        }
    }
}

fn connected_components(weights: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = weights.nrows();
    let mut seen = vec![false; n];
    let mut components = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut stack = vec![start];
        let mut component = Vec::new();
        seen[start] = true;
        while let Some(i) = stack.pop() {
            component.push(i);
            for j in 0..n {
                if !seen[j] && weights[(i, j)] > 0.0 {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        component.sort_unstable();
        components.push(component);
    }
    components
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn single() -> DirichletSpace {
        DirichletSpace::build_graph_space(&DMatrix::zeros(1, 1), &[1.0], &[1.0]).unwrap()
    }

    fn two_node() -> DirichletSpace {
        let w = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        DirichletSpace::build_graph_space(&w, &[1.0, 0.0], &[1.0, 1.0]).unwrap()
    }

    #[test]
    fn single_node_generator() {
        let s = single();
        assert_eq!(s.generator()[(0, 0)], -1.0);
        assert_relative_eq!(s.eigenvalues()[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn two_node_spectrum() {
        let s = two_node();
        let neg_l = -s.generator();
        assert_eq!(neg_l, DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 1.0]));
        // roots of λ² − 3λ + 1
        let root5 = 5f64.sqrt();
        assert_relative_eq!(s.eigenvalues()[0], (3.0 - root5) / 2.0, epsilon = 1e-14);
        assert_relative_eq!(s.eigenvalues()[1], (3.0 + root5) / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn rejects_bad_inputs() {
        let w = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]);
        let err = DirichletSpace::build_graph_space(&w, &[1.0, 0.0], &[1.0, 1.0]).unwrap_err();
        assert_eq!(err.to_string(), "asymmetric weights at (0, 1)");

        let w = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(matches!(
            DirichletSpace::build_graph_space(&w, &[0.0, 0.0], &[1.0, 1.0]),
            Err(DirichletError::NotTransient { .. })
        ));
        assert!(matches!(
            DirichletSpace::build_graph_space(&w, &[1.0, 0.0], &[1.0, 0.0]),
            Err(DirichletError::NonPositiveMeasure { node: 1, .. })
        ));
        // two components, only one killed
        let w = DMatrix::zeros(2, 2);
        assert!(matches!(
            DirichletSpace::build_graph_space(&w, &[1.0, 0.0], &[1.0, 1.0]),
            Err(DirichletError::NotTransient { component }) if component == vec![1]
        ));
    }

    #[test]
    fn energy_examples() {
        let s = single();
        let one = DVector::from_element(1, 1.0);
        assert_eq!(s.energy(&one, &one).unwrap(), 1.0);
        let t = two_node();
        let ones = DVector::from_element(2, 1.0);
        assert_relative_eq!(t.energy(&ones, &ones).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(t.energy(&DVector::zeros(2), &DVector::zeros(2)).unwrap(), 0.0);
        assert!(matches!(
            t.energy(&one, &ones),
            Err(DirichletError::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn semigroup_examples() {
        let s = single();
        let f = DVector::from_element(1, 1.0);
        assert_relative_eq!(s.semigroup_apply(1.0, &f).unwrap()[0], (-1f64).exp(), epsilon = 1e-15);
        assert_eq!(s.semigroup_apply(0.0, &f).unwrap(), f);
        assert!(matches!(s.semigroup_apply(-1.0, &f), Err(DirichletError::NegativeTime(_))));

        let t = two_node();
        for k in 0..2 {
            let phi = t.eigenfunction(k);
            let out = t.semigroup_apply(0.7, &phi).unwrap();
            let expected = &phi * (-0.7 * t.eigenvalues()[k]).exp();
            assert_relative_eq!(out, expected, epsilon = 1e-14);
        }
    }

    #[test]
    fn gamma_and_dual_examples() {
        let s = single();
        let one = DVector::from_element(1, 1.0);
        assert_relative_eq!(s.gamma_transform(2.0, &one).unwrap()[0], 0.5, epsilon = 1e-15);
        assert!(s.gamma_transform(0.0, &one).is_err());

        let l = DualFunctional::new(one.clone());
        assert_relative_eq!(s.dual_norm_nu(&l, 1.0).unwrap(), 0.5f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(s.dual_norm_fe(&l), 1.0, epsilon = 1e-15);
        assert_eq!(s.dual_norm_fe(&DualFunctional::zeros(1)), 0.0);
        assert!(s.dual_norm_nu(&l, 0.0).is_err());

        let t = two_node();
        for k in 0..2 {
            let l = DualFunctional::new(t.eigenfunction(k));
            assert_relative_eq!(t.dual_norm_fe(&l), t.eigenvalues()[k].powf(-0.5), epsilon = 1e-13);
        }
    }

    #[test]
    fn lbar_scalar_pairing() {
        let s = single();
        let u = DVector::from_element(1, 1.0);
        let lu = s.apply_lbar(&u).unwrap();
        assert_eq!(lu.density[0], -1.0);
        let v = DVector::from_element(1, 1.0);
        assert_relative_eq!(s.fe_star_inner(&lu.density, &v), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn subordination_examples() {
        let s = single();
        let sub = s.subordinate(&BernsteinFunction::Power(0.4)).unwrap();
        assert_relative_eq!(sub.generator()[(0, 0)], -1.0, epsilon = 1e-15);
        assert!(s.subordinate(&BernsteinFunction::Power(1.0)).is_err());
        assert!(s.subordinate(&BernsteinFunction::ShiftedPower(0.0)).is_err());
        let t = two_node();
        let sub = t.subordinate(&BernsteinFunction::ShiftedPower(0.5)).unwrap();
        assert_eq!(sub.basis(), t.basis());
        for k in 0..2 {
            assert_eq!(sub.eigenvalues()[k], (t.eigenvalues()[k] + 1.0).powf(0.5) - 1.0);
        }
        assert!(sub.sign_defect() <= 1e-12);
    }

    #[test]
    fn opnorm_single_node() {
        let s = single();
        assert_relative_eq!(s.opnorm(1.0, NormPair::OneToTwo).unwrap(), (-1f64).exp(), epsilon = 1e-15);
        assert!(s.opnorm(0.0, NormPair::OneToTwo).is_err());
        assert!(NormPair::from_exponents(2, Some(2)).is_err());
    }
}
