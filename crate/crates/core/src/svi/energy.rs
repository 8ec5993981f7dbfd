use std::sync::Arc;

use nalgebra::DVector;

use crate::dirichlet::DirichletSpace;
use crate::monotone::{ConvexPotential, MonotoneError, YosidaApprox};

/// `φ(v) = Σ_i μ_i ψ(v_i)` and its Moreau regularization `φ^ε`.
#[derive(Clone, Debug)]
pub struct EnergyFunctional {
    space: Arc<DirichletSpace>,
    potential: ConvexPotential,
}

/// One term `v_n = P_{1/n} v` of a mollifying sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct Mollified {
    pub n: usize,
    pub state: DVector<f64>,
    pub phi: f64,
    /// `‖v_n − v‖_{𝓕_e^*}`.
    pub distance: f64,
}

impl EnergyFunctional {
    pub fn new(space: Arc<DirichletSpace>, potential: ConvexPotential) -> Self {
        EnergyFunctional { space, potential }
    }

    pub fn space(&self) -> &DirichletSpace {
        &self.space
    }

    pub fn potential(&self) -> &ConvexPotential {
        &self.potential
    }

    pub fn phi(&self, v: &DVector<f64>) -> f64 {
        v.iter()
            .zip(self.space.measure().iter())
            .map(|(&x, &m)| m * self.potential.psi(x))
            .sum()
    }

    pub fn phi_eps(&self, eps: f64, v: &DVector<f64>) -> Result<f64, MonotoneError> {
        let approx = YosidaApprox::new(self.potential.clone(), eps)?;
        self.phi_with(&approx, v)
    }

    /// `φ^ε` for an already constructed regularization.
    pub fn phi_with(&self, approx: &YosidaApprox, v: &DVector<f64>) -> Result<f64, MonotoneError> {
        let mut total = 0.0;
        for (&x, &m) in v.iter().zip(self.space.measure().iter()) {
            total += m * approx.moreau(x)?;
        }
        Ok(total)
    }

    /// `ε Σ_i μ_i |β(v_i)|²`, the pointwise bound on `φ − φ^ε`.
    pub fn gap_bound(&self, eps: f64, v: &DVector<f64>) -> f64 {
        eps * v
            .iter()
            .zip(self.space.measure().iter())
            .map(|(&x, &m)| m * self.potential.min_section(x).powi(2))
            .sum::<f64>()
    }

    /// `2c²ε(|v|²₂ + μ(E))`, the gap bound with the linear growth constant folded in.
    pub fn folded_gap_bound(&self, eps: f64, v: &DVector<f64>) -> Option<f64> {
        let c = self.potential.h3_constant()?;
        Some(2.0 * c * c * eps * (self.space.l2_inner(v, v) + self.space.total_mass()))
    }

    /// `v_n = P_{1/n} v` for `n = 1..=n_max`.
    pub fn mollify_sequence(&self, v: &DVector<f64>, n_max: usize) -> Result<Vec<Mollified>, crate::dirichlet::DirichletError> {
        (1..=n_max)
            .map(|n| {
                let state = self.space.semigroup_apply(1.0 / n as f64, v)?;
                let distance = self.space.fe_star_norm_sq(&(&state - v)).max(0.0).sqrt();
                Ok(Mollified {
                    n,
                    phi: self.phi(&state),
                    state,
                    distance,
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn single() -> Arc<DirichletSpace> {
        Arc::new(DirichletSpace::build_graph_space(&DMatrix::zeros(1, 1), &[1.0], &[1.0]).unwrap())
    }

    #[test]
    fn phi_examples() {
        let f = EnergyFunctional::new(single(), ConvexPotential::zhang());
        assert_eq!(f.phi(&DVector::zeros(1)), 0.0);
        assert_eq!(f.phi(&DVector::from_element(1, 2.0)), 4.0);
        assert_eq!(f.phi_eps(0.5, &DVector::from_element(1, 2.0)).unwrap(), 2.5);
        assert_eq!(f.gap_bound(0.5, &DVector::from_element(1, 2.0)), 4.5);

        let w = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let two = Arc::new(DirichletSpace::build_graph_space(&w, &[1.0, 0.0], &[1.0, 1.0]).unwrap());
        let fd = EnergyFunctional::new(two, ConvexPotential::fast_diffusion(0.5).unwrap());
        assert!((fd.phi(&DVector::from_vec(vec![1.0, 4.0])) - 6.0).abs() < 1e-14);
    }

    #[test]
    fn scalar_mollification() {
        let f = EnergyFunctional::new(single(), ConvexPotential::zhang());
        let v = DVector::from_element(1, 3.0);
        for m in f.mollify_sequence(&v, 8).unwrap() {
            let expected = (-1.0 / m.n as f64).exp() * 3.0;
            assert!((m.state[0] - expected).abs() < 1e-14);
            assert!(m.phi <= f.phi(&v));
        }
    }
}
