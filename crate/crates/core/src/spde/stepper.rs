use nalgebra::{Cholesky, DMatrix, DVector, Dyn, LU};

use super::noise::NoiseModel;
use super::SimError;
use crate::dirichlet::DirichletSpace;
use crate::monotone::YosidaApprox;

/// Relative residual target of the implicit solve.
pub const STEP_TOL: f64 = 1e-10;
/// Iteration cap of the implicit solve.
pub const MAX_NEWTON: usize = 100;
const MAX_BACKTRACK: usize = 40;
const ARMIJO: f64 = 1e-4;
/// Relative rounding allowance in the Armijo test.
const MERIT_ROUNDING: f64 = 1e-14;
/// Once within tolerance, keep iterating while the residual still drops
/// below this fraction of it; Newton usually gets there in one more step.
const POLISH: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub state: DVector<f64>,
    pub residual: f64,
    pub iterations: usize,
    /// Iterations that fell back to the majorized fixed-point update.
    pub fallback_iterations: usize,
}

/// Drift-implicit, noise-explicit Euler step for
/// `dX = L(β^ε(X) + εX) dt + B(X) dW`.
///
/// Writing `A = −L`, the step solves `x + Δt·A(β^ε(x) + εx) = rhs` with
/// `rhs = X + B(X)dW`. That equation is the stationarity condition of the
/// strongly convex functional
/// `Φ(x) = ½⟨x − rhs, A^{-1}(x − rhs)⟩_μ + Δt Σ_i μ_i (ψ^ε(x_i) + εx_i²/2)`,
/// which serves as the line-search merit for a damped Newton iteration.
#[derive(Clone, Debug)]
pub struct ImplicitStepper<'a> {
    space: &'a DirichletSpace,
    approx: &'a YosidaApprox,
    dt: f64,
    /// `M A^{-1}`, symmetric positive definite.
    weighted_inverse: DMatrix<f64>,
    /// Factorization of `A^{-1} + Δt(1/ε + ε)I`, the majorizer of the Hessian.
    majorizer: LU<f64, Dyn, Dyn>,
}

impl<'a> ImplicitStepper<'a> {
    pub fn new(space: &'a DirichletSpace, approx: &'a YosidaApprox, dt: f64) -> Result<Self, SimError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(SimError::InvalidConfig(format!("time step must be positive, got {dt}")));
        }
        let inverse = space.spectral_matrix(|l| 1.0 / l);
        let weighted_inverse = space.fe_star_gram().clone();
        let eps = approx.epsilon();
        let n = space.node_count();
        let majorizer = (inverse + DMatrix::identity(n, n) * (dt * (1.0 / eps + eps))).lu();
        Ok(ImplicitStepper {
            space,
            approx,
            dt,
            weighted_inverse,
            majorizer,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// The nonlinear node map `g(x) = β^ε(x) + εx`.
    fn drift_map(&self, x: &DVector<f64>) -> Result<DVector<f64>, SimError> {
        let eps = self.approx.epsilon();
        let mut out = DVector::zeros(x.len());
        for (o, &v) in out.iter_mut().zip(x.iter()) {
            *o = self.approx.yosida(v)? + eps * v;
        }
        Ok(out)
    }

    /// `F(x) = x + Δt·A g(x) − rhs`.
    fn residual_vec(&self, x: &DVector<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>, SimError> {
        let g = self.drift_map(x)?;
        Ok(x - rhs - (self.space.generator() * g) * self.dt)
    }

    fn merit(&self, x: &DVector<f64>, rhs: &DVector<f64>) -> Result<f64, SimError> {
        let d = x - rhs;
        let quad = 0.5 * d.dot(&(&self.weighted_inverse * &d));
        let eps = self.approx.epsilon();
        let mut pot = 0.0;
        for (&v, &m) in x.iter().zip(self.space.measure().iter()) {
            pot += m * (self.approx.moreau(v)? + 0.5 * eps * v * v);
        }
        Ok(quad + self.dt * pot)
    }

    fn norm(&self, v: &DVector<f64>) -> f64 {
        self.space.l2_norm(v)
    }

    /// Solves the implicit equation for a given right-hand side.
    pub fn solve(&self, rhs: &DVector<f64>, guess: &DVector<f64>) -> Result<StepOutcome, SimError> {
        if rhs.iter().any(|v| !v.is_finite()) {
            return Err(SimError::NonFinite { path: None, step: None });
        }
        let tol = STEP_TOL * (1.0 + self.norm(rhs));
        let eps = self.approx.epsilon();
        let mu = self.space.measure();
        let mut x = guess.clone();
        let mut f = self.residual_vec(&x, rhs)?;
        let mut res = self.norm(&f);
        let mut phi = self.merit(&x, rhs)?;
        let mut fallback_iterations = 0;

        for it in 0..MAX_NEWTON {
            if res <= POLISH * tol {
                return Ok(StepOutcome {
                    state: x,
                    residual: res,
                    iterations: it,
                    fallback_iterations,
                });
            }
            // ∇Φ = M A^{-1} F
            let grad = &self.weighted_inverse * &f;
            let mut hess = self.weighted_inverse.clone();
            for i in 0..x.len() {
                hess[(i, i)] += self.dt * mu[i] * (self.approx.yosida_slope(x[i])? + eps);
            }
            let newton = Cholesky::new(hess).map(|c| -c.solve(&grad));

            let mut accepted = None;
            if let Some(dir) = newton {
                let slope = grad.dot(&dir);
                let mut t = 1.0;
                // near the solution Φ stalls at rounding level, so the first
                // residual-decreasing trial is kept in case Armijo never holds
                let mut backup = None;
                for _ in 0..MAX_BACKTRACK {
                    let trial = &x + &dir * t;
                    let trial_phi = self.merit(&trial, rhs)?;
                    let trial_f = self.residual_vec(&trial, rhs)?;
                    let trial_res = self.norm(&trial_f);
                    if trial_phi <= phi + ARMIJO * t * slope + MERIT_ROUNDING * (1.0 + phi.abs()) {
                        accepted = Some((trial, trial_f, trial_res, trial_phi));
                        break;
                    }
                    if backup.is_none() && trial_res < res {
                        backup = Some((trial, trial_f, trial_res, trial_phi));
                    }
                    t *= 0.5;
                }
                accepted = accepted.or(backup);
            }
            let (nx, nf, nres, nphi) = match accepted {
                Some(v) => v,
                None => {
                    fallback_iterations += 1;
                    let inv_f = self.space.spectral_apply(&f, |l| 1.0 / l);
                    let step = self
                        .majorizer
                        .solve(&inv_f)
                        .ok_or_else(|| SimError::InvalidConfig("singular majorizer".into()))?;
                    let trial = &x - step;
                    let trial_f = self.residual_vec(&trial, rhs)?;
                    let trial_res = self.norm(&trial_f);
                    let trial_phi = self.merit(&trial, rhs)?;
                    (trial, trial_f, trial_res, trial_phi)
                }
            };
            if res <= tol && nres >= res {
                return Ok(StepOutcome {
                    state: x,
                    residual: res,
                    iterations: it + 1,
                    fallback_iterations,
                });
            }
            x = nx;
            f = nf;
            res = nres;
            phi = nphi;
        }
        if res <= tol {
            return Ok(StepOutcome {
                state: x,
                residual: res,
                iterations: MAX_NEWTON,
                fallback_iterations,
            });
        }
        Err(SimError::SolverFailed {
            path: None,
            step: None,
            residual: res,
            iterations: MAX_NEWTON,
        })
    }

    /// One step from `state` with increment `dw`.
    pub fn step(&self, noise: &NoiseModel, state: &DVector<f64>, dw: &DVector<f64>) -> Result<StepOutcome, SimError> {
        let rhs = state + noise.apply(state, dw);
        self.solve(&rhs, &rhs)
    }
}

/// Single step without a cached stepper; see [`ImplicitStepper`].
pub fn step_semi_implicit(
    space: &DirichletSpace,
    approx: &YosidaApprox,
    noise: &NoiseModel,
    state: &DVector<f64>,
    dt: f64,
    dw: &DVector<f64>,
) -> Result<StepOutcome, SimError> {
    ImplicitStepper::new(space, approx, dt)?.step(noise, state, dw)
}
