use super::MonotoneError;

const CONTINUITY_TOL: f64 = 1e-12;

/// Continuous piecewise quadratic `ψ(r) = a r² + b r + c` on the pieces cut
/// by strictly increasing breakpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseQuadratic {
    breakpoints: Vec<f64>,
    pieces: Vec<[f64; 3]>,
}

impl PiecewiseQuadratic {
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<[f64; 3]>) -> Result<Self, MonotoneError> {
        if pieces.len() != breakpoints.len() + 1 {
            return Err(MonotoneError::InvalidParameter(format!(
                "piecewise potential needs {} pieces for {} breakpoints, got {}",
                breakpoints.len() + 1,
                breakpoints.len(),
                pieces.len()
            )));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) || breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(MonotoneError::InvalidParameter(
                "piecewise breakpoints must be finite and strictly increasing".into(),
            ));
        }
        if pieces.iter().flatten().any(|c| !c.is_finite()) {
            return Err(MonotoneError::InvalidParameter("piecewise coefficients must be finite".into()));
        }
        let pw = PiecewiseQuadratic { breakpoints, pieces };
        for (j, &b) in pw.breakpoints.iter().enumerate() {
            let left = eval_quadratic(&pw.pieces[j], b);
            let right = eval_quadratic(&pw.pieces[j + 1], b);
            if (left - right).abs() > CONTINUITY_TOL * (1.0 + left.abs().max(right.abs())) {
                return Err(MonotoneError::Discontinuous { at: b, left, right });
            }
        }
        Ok(pw)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[[f64; 3]] {
        &self.pieces
    }

    fn piece_index(&self, r: f64) -> usize {
        self.breakpoints.partition_point(|&b| b < r)
    }

    fn breakpoint_at(&self, r: f64) -> Option<usize> {
        self.breakpoints.iter().position(|&b| b == r)
    }

    fn value(&self, r: f64) -> f64 {
        eval_quadratic(&self.pieces[self.piece_index(r)], r)
    }

    fn derivative_interval(&self, r: f64) -> (f64, f64) {
        match self.breakpoint_at(r) {
            Some(j) => (slope_of(&self.pieces[j], r), slope_of(&self.pieces[j + 1], r)),
            None => {
                let d = slope_of(&self.pieces[self.piece_index(r)], r);
                (d, d)
            }
        }
    }

    fn curvature(&self, r: f64) -> f64 {
        match self.breakpoint_at(r) {
            Some(j) if slope_of(&self.pieces[j], r) != slope_of(&self.pieces[j + 1], r) => f64::INFINITY,
            Some(j) => 2.0 * self.pieces[j + 1][0],
            None => 2.0 * self.pieces[self.piece_index(r)][0],
        }
    }
}

fn eval_quadratic(p: &[f64; 3], r: f64) -> f64 {
    (p[0] * r + p[1]) * r + p[2]
}

fn slope_of(p: &[f64; 3], r: f64) -> f64 {
    2.0 * p[0] * r + p[1]
}

#[derive(Clone, Debug, PartialEq)]
pub enum PotentialKind {
    /// `ψ(r) = |r|^{θ+1}/(θ+1)`, `β(r) = |r|^{θ−1} r`, θ ∈ (0,1).
    FastDiffusion { theta: f64 },
    /// `ψ(r) = |r|^{γ+1}/(γ+1)`, γ > 1. Violates the linear growth bound on β.
    PorousMedium { gamma: f64 },
    /// `ψ(r) = r²/2 + r` for r > 0 and 0 otherwise; β jumps from 0 to 1 at the origin.
    Zhang,
    Piecewise(PiecewiseQuadratic),
}

/// Convex `ψ : ℝ → [0, ∞)` together with its interval-valued subdifferential.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexPotential {
    kind: PotentialKind,
    h3_constant: Option<f64>,
}

impl ConvexPotential {
    pub fn fast_diffusion(theta: f64) -> Result<Self, MonotoneError> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(MonotoneError::InvalidParameter(format!(
                "fast diffusion exponent must lie in (0,1), got {theta}"
            )));
        }
        // |r|^θ ≤ |r| + 1
        Ok(ConvexPotential {
            kind: PotentialKind::FastDiffusion { theta },
            h3_constant: Some(1.0),
        })
    }

    pub fn porous_medium(gamma: f64) -> Result<Self, MonotoneError> {
        if !(gamma > 1.0 && gamma.is_finite()) {
            return Err(MonotoneError::InvalidParameter(format!(
                "porous medium exponent must exceed 1, got {gamma}"
            )));
        }
        Ok(ConvexPotential {
            kind: PotentialKind::PorousMedium { gamma },
            h3_constant: None,
        })
    }

    pub fn zhang() -> Self {
        ConvexPotential {
            kind: PotentialKind::Zhang,
            h3_constant: Some(1.0),
        }
    }

    pub fn piecewise(breakpoints: Vec<f64>, pieces: Vec<[f64; 3]>) -> Result<Self, MonotoneError> {
        let pw = PiecewiseQuadratic::new(breakpoints, pieces)?;
        // |2ar + b| ≤ max(2|a|, |b|)(|r| + 1) on every piece
        let c = pw
            .pieces
            .iter()
            .map(|p| (2.0 * p[0].abs()).max(p[1].abs()))
            .fold(0.0, f64::max);
        Ok(ConvexPotential {
            kind: PotentialKind::Piecewise(pw),
            h3_constant: Some(c.max(f64::MIN_POSITIVE)),
        })
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            PotentialKind::FastDiffusion { .. } => "fast_diffusion",
            PotentialKind::PorousMedium { .. } => "porous_medium",
            PotentialKind::Zhang => "zhang",
            PotentialKind::Piecewise(_) => "piecewise",
        }
    }

    /// Constant `c` with `inf{|η| : η ∈ β(r)} ≤ c(|r| + 1)`, when one exists.
    pub fn h3_constant(&self) -> Option<f64> {
        self.h3_constant
    }

    pub fn psi(&self, r: f64) -> f64 {
        match &self.kind {
            PotentialKind::FastDiffusion { theta } => r.abs().powf(theta + 1.0) / (theta + 1.0),
            PotentialKind::PorousMedium { gamma } => r.abs().powf(gamma + 1.0) / (gamma + 1.0),
            PotentialKind::Zhang => {
                if r > 0.0 {
                    0.5 * r * r + r
                } else {
                    0.0
                }
            }
            PotentialKind::Piecewise(pw) => pw.value(r),
        }
    }

    /// `β(r) = [β⁻(r), β⁺(r)]`.
    pub fn beta_interval(&self, r: f64) -> (f64, f64) {
        match &self.kind {
            PotentialKind::FastDiffusion { theta } => {
                let v = r.signum() * r.abs().powf(*theta);
                let v = if r == 0.0 { 0.0 } else { v };
                (v, v)
            }
            PotentialKind::PorousMedium { gamma } => {
                let v = if r == 0.0 { 0.0 } else { r.signum() * r.abs().powf(*gamma) };
                (v, v)
            }
            PotentialKind::Zhang => {
                if r > 0.0 {
                    (r + 1.0, r + 1.0)
                } else if r == 0.0 {
                    (0.0, 1.0)
                } else {
                    (0.0, 0.0)
                }
            }
            PotentialKind::Piecewise(pw) => pw.derivative_interval(r),
        }
    }

    /// `|β(r)| := inf{|η| : η ∈ β(r)}`.
    pub fn min_section(&self, r: f64) -> f64 {
        let (lo, hi) = self.beta_interval(r);
        if lo <= 0.0 && 0.0 <= hi {
            0.0
        } else {
            lo.abs().min(hi.abs())
        }
    }

    /// Almost-everywhere derivative of β; `+∞` on vertical segments of the
    /// graph and where β has an infinite slope.
    pub fn beta_slope(&self, r: f64) -> f64 {
        match &self.kind {
            PotentialKind::FastDiffusion { theta } => {
                if r == 0.0 {
                    f64::INFINITY
                } else {
                    theta * r.abs().powf(theta - 1.0)
                }
            }
            PotentialKind::PorousMedium { gamma } => gamma * r.abs().powf(gamma - 1.0),
            PotentialKind::Zhang => {
                if r > 0.0 {
                    1.0
                } else if r == 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            PotentialKind::Piecewise(pw) => pw.curvature(r),
        }
    }

    /// Points where β is multi-valued or fails to be differentiable.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            PotentialKind::FastDiffusion { .. } | PotentialKind::PorousMedium { .. } | PotentialKind::Zhang => vec![0.0],
            PotentialKind::Piecewise(pw) => pw.breakpoints.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zhang_table() {
        let z = ConvexPotential::zhang();
        assert_eq!(z.psi(2.0), 4.0);
        assert_eq!(z.psi(-3.0), 0.0);
        assert_eq!(z.beta_interval(1.0), (2.0, 2.0));
        assert_eq!(z.beta_interval(0.0), (0.0, 1.0));
        assert_eq!(z.beta_interval(-1.0), (0.0, 0.0));
        assert_eq!(z.min_section(0.0), 0.0);
        assert_eq!(z.min_section(2.0), 3.0);
    }

    #[test]
    fn fast_diffusion_values() {
        let f = ConvexPotential::fast_diffusion(0.5).unwrap();
        assert!((f.psi(4.0) - 16.0 / 3.0).abs() < 1e-14);
        assert_eq!(f.beta_interval(-4.0), (-2.0, -2.0));
        assert_eq!(f.beta_interval(0.0), (0.0, 0.0));
        assert!(ConvexPotential::fast_diffusion(1.0).is_err());
        assert!(ConvexPotential::porous_medium(1.0).is_err());
    }

    #[test]
    fn piecewise_matches_zhang() {
        let pw = ConvexPotential::piecewise(vec![0.0], vec![[0.0, 0.0, 0.0], [0.5, 1.0, 0.0]]).unwrap();
        let z = ConvexPotential::zhang();
        for r in [-2.0, -0.1, 0.0, 0.3, 5.0] {
            assert_eq!(pw.psi(r), z.psi(r));
            assert_eq!(pw.beta_interval(r), z.beta_interval(r));
        }
        assert_eq!(pw.h3_constant(), Some(1.0));
    }

    #[test]
    fn piecewise_rejects_bad_shapes() {
        assert!(matches!(
            ConvexPotential::piecewise(vec![0.0], vec![[0.0, 0.0, 0.0], [0.0, 0.0, 1.0]]),
            Err(MonotoneError::Discontinuous { .. })
        ));
        assert!(ConvexPotential::piecewise(vec![1.0, 0.0], vec![[0.0; 3]; 3]).is_err());
        assert!(ConvexPotential::piecewise(vec![0.0], vec![[0.0; 3]]).is_err());
    }
}
