use super::potential::{ConvexPotential, PotentialKind};
use super::MonotoneError;

/// Relative residual target for the scalar inclusion `0 ∈ s − r + εβ(s)`.
pub const RESOLVENT_TOL: f64 = 1e-12;
const MAX_ITER: usize = 200;

/// Moreau–Yosida regularization of a convex potential at a fixed ε ∈ (0,1].
///
/// The closed endpoint admits the unit-step scalar examples; the simulation
/// layer restricts itself to the open interval.
#[derive(Clone, Debug, PartialEq)]
pub struct YosidaApprox {
    potential: ConvexPotential,
    epsilon: f64,
}

impl YosidaApprox {
    pub fn new(potential: ConvexPotential, epsilon: f64) -> Result<Self, MonotoneError> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(MonotoneError::EpsilonOutOfRange(epsilon));
        }
        Ok(YosidaApprox { potential, epsilon })
    }

    pub fn potential(&self) -> &ConvexPotential {
        &self.potential
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `J^ε(r) = (1 + εβ)^{-1}(r)`, the proximal point of `ψ` at `r`.
    pub fn resolvent(&self, r: f64) -> Result<f64, MonotoneError> {
        if !r.is_finite() {
            return Err(MonotoneError::NonFinite(r));
        }
        if r == 0.0 {
            return Ok(0.0);
        }
        let eps = self.epsilon;
        match self.potential.kind() {
            PotentialKind::Zhang => Ok(if r <= 0.0 {
                r
            } else if r <= eps {
                0.0
            } else {
                (r - eps) / (1.0 + eps)
            }),
            PotentialKind::FastDiffusion { theta } if *theta == 0.5 => {
                // √s solves q² + εq − |r| = 0
                let q = 2.0 * r.abs() / (eps + (eps * eps + 4.0 * r.abs()).sqrt());
                Ok(r.signum() * q * q)
            }
            PotentialKind::PorousMedium { gamma } if *gamma == 2.0 => {
                let a = r.abs();
                Ok(r.signum() * 2.0 * a / (1.0 + (1.0 + 4.0 * eps * a).sqrt()))
            }
            PotentialKind::PorousMedium { gamma } if *gamma == 3.0 => {
                // s + εs³ = r via the hyperbolic form of Cardano, then one Newton polish
                let k = (3.0 * eps).sqrt();
                let mut s = 2.0 / k * ((1.5 * r * k).asinh() / 3.0).sinh();
                s -= (s + eps * s * s * s - r) / (1.0 + 3.0 * eps * s * s);
                Ok(s)
            }
            _ => self.solve(r),
        }
    }

    /// Distance of `r` from the interval `s + εβ(s)`.
    pub fn inclusion_residual(&self, r: f64, s: f64) -> f64 {
        let (lo, hi) = self.graph_at(s);
        if r < lo {
            lo - r
        } else if r > hi {
            r - hi
        } else {
            0.0
        }
    }

    fn graph_at(&self, s: f64) -> (f64, f64) {
        let (bm, bp) = self.potential.beta_interval(s);
        (s + self.epsilon * bm, s + self.epsilon * bp)
    }

    /// Safeguarded Newton on the strictly increasing map `s ↦ s + εβ(s)`,
    /// after the multi-valued breakpoints have been resolved exactly.
    fn solve(&self, r: f64) -> Result<f64, MonotoneError> {
        let tol = RESOLVENT_TOL * (1.0 + r.abs());
        let (mut lo, mut hi) = if r > 0.0 { (0.0, r) } else { (r, 0.0) };
        for b in self.potential.breakpoints() {
            if b < lo || b > hi {
                continue;
            }
            let (a, c) = self.graph_at(b);
            if a <= r && r <= c {
                return Ok(b);
            }
            if c < r {
                lo = lo.max(b);
            } else {
                hi = hi.min(b);
            }
        }

        let mut s = 0.5 * (lo + hi);
        let mut residual = f64::INFINITY;
        for _ in 0..MAX_ITER {
            let (a, c) = self.graph_at(s);
            let excess = if a > r {
                a - r
            } else if c < r {
                c - r
            } else {
                return Ok(s);
            };
            residual = excess.abs();
            if residual <= tol {
                return Ok(s);
            }
            if excess > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let slope = self.potential.beta_slope(s);
            let newton = s - excess / (1.0 + self.epsilon * slope);
            let next = if newton >= lo && newton <= hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if next == s {
                break;
            }
            s = next;
        }
        Err(MonotoneError::NoConvergence {
            r,
            residual,
            iterations: MAX_ITER,
        })
    }

    /// `β^ε(r) = (r − J^ε(r))/ε`.
    pub fn yosida(&self, r: f64) -> Result<f64, MonotoneError> {
        let j = self.resolvent(r)?;
        Ok((r - j) / self.epsilon)
    }

    /// `ψ^ε(r) = |r − J^ε(r)|²/(2ε) + ψ(J^ε(r))`.
    pub fn moreau(&self, r: f64) -> Result<f64, MonotoneError> {
        let j = self.resolvent(r)?;
        let d = r - j;
        Ok(d * d / (2.0 * self.epsilon) + self.potential.psi(j))
    }

    /// One-sided derivative of `β^ε`, taking `1/ε` on vertical segments.
    pub fn yosida_slope(&self, r: f64) -> Result<f64, MonotoneError> {
        let j = self.resolvent(r)?;
        let slope = self.potential.beta_slope(j);
        Ok(if slope.is_finite() {
            slope / (1.0 + self.epsilon * slope)
        } else {
            1.0 / self.epsilon
        })
    }
}

/// Both sides of the two-ε monotonicity bounds for a single pair `(r, r')`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossMonotonicity {
    /// `(β^{ε₁}(r) − β^{ε₂}(r'))(r − r')`.
    pub lhs: f64,
    /// `−(ε₁+ε₂)(|β^{ε₁}(r)|² + |β^{ε₂}(r')|²)/2`.
    pub yosida_bound: f64,
    /// `−C(ε₁+ε₂)(|r|² + |r'|² + 1)` with `C = 2c²`; absent without a linear growth constant.
    pub growth_bound: Option<f64>,
}

impl CrossMonotonicity {
    pub fn yosida_slack(&self) -> f64 {
        self.lhs - self.yosida_bound
    }

    pub fn growth_slack(&self) -> Option<f64> {
        self.growth_bound.map(|b| self.lhs - b)
    }

    pub fn scale(&self) -> f64 {
        1.0 + self.lhs.abs() + self.yosida_bound.abs() + self.growth_bound.map_or(0.0, f64::abs)
    }

    /// Both slacks at least `−tol·scale`.
    pub fn holds(&self, tol: f64) -> bool {
        let floor = -tol * self.scale();
        self.yosida_slack() >= floor && self.growth_slack().is_none_or(|s| s >= floor)
    }
}

pub fn cross_monotonicity_defect(
    potential: &ConvexPotential,
    eps1: f64,
    eps2: f64,
    r: f64,
    r_prime: f64,
) -> Result<CrossMonotonicity, MonotoneError> {
    let a = YosidaApprox::new(potential.clone(), eps1)?.yosida(r)?;
    let b = YosidaApprox::new(potential.clone(), eps2)?.yosida(r_prime)?;
    let sum = eps1 + eps2;
    let growth_bound = potential
        .h3_constant()
        .map(|c| -2.0 * c * c * sum * (r * r + r_prime * r_prime + 1.0));
    Ok(CrossMonotonicity {
        lhs: (a - b) * (r - r_prime),
        yosida_bound: -0.5 * sum * (a * a + b * b),
        growth_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zhang(eps: f64) -> YosidaApprox {
        YosidaApprox::new(ConvexPotential::zhang(), eps).unwrap()
    }

    #[test]
    fn zhang_examples() {
        let y = zhang(0.5);
        assert_eq!(y.resolvent(2.0).unwrap(), 1.0);
        assert_eq!(y.yosida(2.0).unwrap(), 2.0);
        assert_eq!(y.yosida(0.25).unwrap(), 0.5);
        assert_eq!(y.moreau(2.0).unwrap(), 2.5);
        assert_eq!(y.resolvent(0.0).unwrap(), 0.0);
    }

    #[test]
    fn fast_diffusion_examples() {
        let fd = ConvexPotential::fast_diffusion(0.5).unwrap();
        let y = YosidaApprox::new(fd.clone(), 1.0).unwrap();
        assert_eq!(y.resolvent(2.0).unwrap(), 1.0);
        assert_eq!(y.moreau(2.0).unwrap(), 0.5 + 2.0 / 3.0);
        assert!(YosidaApprox::new(fd.clone(), 1.5).is_err());
        assert!(YosidaApprox::new(fd, 0.0).is_err());
    }

    #[test]
    fn closed_forms_match_generic_solver() {
        let cases = [
            ConvexPotential::fast_diffusion(0.5).unwrap(),
            ConvexPotential::porous_medium(2.0).unwrap(),
            ConvexPotential::porous_medium(3.0).unwrap(),
            ConvexPotential::zhang(),
        ];
        for pot in cases {
            for eps in [0.01, 0.3, 0.9] {
                let y = YosidaApprox::new(pot.clone(), eps).unwrap();
                for r in [-7.5, -1.0, -1e-3, 1e-9, 0.2, 0.9, 3.0, 19.0] {
                    let closed = y.resolvent(r).unwrap();
                    let generic = y.solve(r).unwrap();
                    assert!(
                        (closed - generic).abs() <= 1e-10 * (1.0 + r.abs()),
                        "{} eps={eps} r={r}: {closed} vs {generic}",
                        pot.name()
                    );
                    assert!(y.inclusion_residual(r, closed) <= RESOLVENT_TOL * (1.0 + r.abs()));
                }
            }
        }
    }

    #[test]
    fn generic_solver_hits_breakpoint_exactly() {
        let pw = ConvexPotential::piecewise(vec![1.0], vec![[0.0, 0.0, 0.0], [0.0, 2.0, -2.0]]).unwrap();
        let y = YosidaApprox::new(pw, 0.5).unwrap();
        // the graph at the kink is [1, 2]
        assert_eq!(y.resolvent(1.7).unwrap(), 1.0);
        assert_eq!(y.resolvent(2.5).unwrap(), 1.5);
        assert_eq!(y.resolvent(0.4).unwrap(), 0.4);
    }

    #[test]
    fn cross_monotonicity_at_equal_arguments() {
        let d = cross_monotonicity_defect(&ConvexPotential::zhang(), 0.5, 0.1, 0.3, 0.3).unwrap();
        assert_eq!(d.lhs, 0.0);
        assert!(d.yosida_slack() >= 0.0);
        assert!(d.holds(0.0));
    }

    #[test]
    fn porous_medium_has_no_growth_bound() {
        let d = cross_monotonicity_defect(&ConvexPotential::porous_medium(3.0).unwrap(), 0.2, 0.1, 2.0, -1.0).unwrap();
        assert!(d.growth_bound.is_none());
    }
}
