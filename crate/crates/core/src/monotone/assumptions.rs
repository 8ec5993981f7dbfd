use super::potential::ConvexPotential;

const SHAPE_TOL: f64 = 1e-12;
const GROWTH_RADII: [f64; 3] = [1e2, 1e3, 1e4];

/// `ψ(r)/|r|` on a geometric grid in one tail. Superlinear growth cannot be
/// observed at infinity, so this is evidence only.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthEvidence {
    pub radii: [f64; 3],
    pub ratios: [f64; 3],
}

impl GrowthEvidence {
    fn sample(potential: &ConvexPotential, sign: f64) -> Self {
        let ratios = GROWTH_RADII.map(|a| potential.psi(sign * a) / a);
        GrowthEvidence {
            radii: GROWTH_RADII,
            ratios,
        }
    }

    pub fn increasing(&self) -> bool {
        self.ratios.windows(2).all(|w| w[1] > w[0])
    }
}

/// Worst-case margins of the structural assumptions on a sample grid:
/// a negative margin is a violation.
#[derive(Clone, Debug, PartialEq)]
pub struct AssumptionReport {
    pub potential: String,
    pub grid_len: usize,
    pub psi_at_zero: f64,
    /// `min ψ` over the grid.
    pub nonnegativity_margin: f64,
    /// `min λψ(x) + (1−λ)ψ(z) − ψ(y)` over consecutive grid triples.
    pub convexity_margin: f64,
    /// `min β⁻(r') − β⁺(r)` over consecutive grid pairs `r < r'`.
    pub monotone_margin: f64,
    pub growth_right: GrowthEvidence,
    pub growth_left: GrowthEvidence,
    pub h3_constant: Option<f64>,
    /// `max inf{|η| : η ∈ β(r)}/(|r| + 1)` over the grid.
    pub h3_worst_ratio: f64,
}

impl AssumptionReport {
    pub fn h1_holds(&self) -> bool {
        self.psi_at_zero == 0.0 && self.nonnegativity_margin >= 0.0
    }

    pub fn convex(&self) -> bool {
        self.convexity_margin >= 0.0
    }

    pub fn monotone(&self) -> bool {
        self.monotone_margin >= 0.0
    }

    /// Both tails show growing `ψ(r)/|r|`.
    pub fn growth_observed(&self) -> bool {
        self.growth_right.increasing() && self.growth_left.increasing()
    }

    pub fn h3_holds(&self) -> bool {
        self.h3_constant
            .is_some_and(|c| self.h3_worst_ratio <= c * (1.0 + SHAPE_TOL))
    }

    /// Gated checks only; the growth evidence is reported but never gates,
    /// since a finite grid cannot decide a limit at infinity.
    pub fn passes(&self) -> bool {
        self.h1_holds() && self.convex() && self.monotone() && self.h3_holds()
    }

    /// `(name, passed, margin)` rows in a fixed order.
    pub fn rows(&self) -> Vec<(&'static str, bool, f64)> {
        let c = self.h3_constant.unwrap_or(f64::NAN);
        vec![
            ("h1_psi_at_zero", self.psi_at_zero == 0.0, -self.psi_at_zero.abs()),
            ("h1_nonnegative", self.nonnegativity_margin >= 0.0, self.nonnegativity_margin),
            ("convexity", self.convex(), self.convexity_margin),
            ("monotone_graph", self.monotone(), self.monotone_margin),
            ("h3_linear_growth", self.h3_holds(), c - self.h3_worst_ratio),
        ]
    }
}

pub fn check_assumptions(potential: &ConvexPotential, grid: &[f64]) -> AssumptionReport {
    let mut pts: Vec<f64> = grid.iter().copied().filter(|r| r.is_finite()).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let psi: Vec<f64> = pts.iter().map(|&r| potential.psi(r)).collect();

    let nonnegativity_margin = psi.iter().copied().fold(f64::INFINITY, f64::min);

    let mut convexity_margin = f64::INFINITY;
    for i in 0..pts.len().saturating_sub(2) {
        let (x, y, z) = (pts[i], pts[i + 1], pts[i + 2]);
        let lambda = (z - y) / (z - x);
        let chord = lambda * psi[i] + (1.0 - lambda) * psi[i + 2];
        let gap = chord - psi[i + 1];
        let tol = SHAPE_TOL * (1.0 + chord.abs().max(psi[i + 1].abs()));
        convexity_margin = convexity_margin.min(if gap >= -tol { gap.max(0.0) } else { gap });
    }

    let mut monotone_margin = f64::INFINITY;
    let intervals: Vec<(f64, f64)> = pts.iter().map(|&r| potential.beta_interval(r)).collect();
    for &(lo, hi) in &intervals {
        monotone_margin = monotone_margin.min(hi - lo);
    }
    for w in intervals.windows(2) {
        let gap = w[1].0 - w[0].1;
        let tol = SHAPE_TOL * (1.0 + w[0].1.abs().max(w[1].0.abs()));
        monotone_margin = monotone_margin.min(if gap >= -tol { gap.max(0.0) } else { gap });
    }

    let h3_worst_ratio = pts
        .iter()
        .map(|&r| potential.min_section(r) / (r.abs() + 1.0))
        .fold(0.0, f64::max);

    AssumptionReport {
        potential: potential.name().to_string(),
        grid_len: pts.len(),
        psi_at_zero: potential.psi(0.0),
        nonnegativity_margin,
        convexity_margin,
        monotone_margin,
        growth_right: GrowthEvidence::sample(potential, 1.0),
        growth_left: GrowthEvidence::sample(potential, -1.0),
        h3_constant: potential.h3_constant(),
        h3_worst_ratio,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<f64> {
        (0..=2000).map(|i| -10.0 + i as f64 * 0.01).collect()
    }

    #[test]
    fn fast_diffusion_passes_with_unit_constant() {
        let rep = check_assumptions(&ConvexPotential::fast_diffusion(0.5).unwrap(), &grid());
        assert!(rep.passes(), "{rep:?}");
        assert_eq!(rep.h3_constant, Some(1.0));
        assert!(rep.growth_observed());
    }

    #[test]
    fn zhang_passes_gated_checks_but_left_tail_is_flat() {
        let rep = check_assumptions(&ConvexPotential::zhang(), &grid());
        assert!(rep.passes(), "{rep:?}");
        assert!(rep.growth_right.increasing());
        assert!(!rep.growth_left.increasing());
    }

    #[test]
    fn porous_medium_fails_linear_growth() {
        let rep = check_assumptions(&ConvexPotential::porous_medium(2.0).unwrap(), &grid());
        assert!(!rep.h3_holds());
        assert!(rep.convex() && rep.monotone());
    }

    #[test]
    fn concave_pieces_are_reported() {
        let pot = ConvexPotential::piecewise(vec![0.0], vec![[-1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]).unwrap();
        let rep = check_assumptions(&pot, &grid());
        assert!(!rep.convex());
        assert!(!rep.monotone());
        assert!(!rep.h1_holds());
        assert!(!rep.passes());
    }
}
