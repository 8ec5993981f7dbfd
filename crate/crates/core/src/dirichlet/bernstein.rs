use std::fmt;
use std::sync::Arc;

/// Bernstein functions used to subordinate a generator, `L ↦ −f(−L)`.
#[derive(Clone)]
pub enum BernsteinFunction {
    /// `f(λ) = λ^α`, the fractional power.
    Power(f64),
    /// `f(λ) = (λ + 1)^α − 1`, the relativistic-type shift.
    ShiftedPower(f64),
    /// A user-supplied evaluator. Nonnegativity of the subordinated semigroup
    /// is not guaranteed for these and is only reported.
    Custom {
        name: String,
        eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl BernsteinFunction {
    pub fn custom(name: impl Into<String>, eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        BernsteinFunction::Custom {
            name: name.into(),
            eval: Arc::new(eval),
        }
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        match self {
            BernsteinFunction::Power(alpha) => lambda.powf(*alpha),
            BernsteinFunction::ShiftedPower(alpha) => (lambda + 1.0).powf(*alpha) - 1.0,
            BernsteinFunction::Custom { eval, .. } => eval(lambda),
        }
    }

    /// The exponent for the two built-in kinds.
    pub fn alpha(&self) -> Option<f64> {
        match self {
            BernsteinFunction::Power(a) | BernsteinFunction::ShiftedPower(a) => Some(*a),
            BernsteinFunction::Custom { .. } => None,
        }
    }

    pub fn is_builtin(&self) -> bool {
        !matches!(self, BernsteinFunction::Custom { .. })
    }

    /// Worst violation of `f(0) = 0`, monotonicity and concavity on a grid.
    /// Returns `(f(0), min first difference, max second difference)`.
    pub fn grid_shape(&self, grid: &[f64]) -> (f64, f64, f64) {
        let values: Vec<f64> = grid.iter().map(|&x| self.eval(x)).collect();
        let mut min_first = f64::INFINITY;
        let mut max_second = f64::NEG_INFINITY;
        for w in values.windows(2) {
            min_first = min_first.min(w[1] - w[0]);
        }
        for (i, w) in values.windows(3).enumerate() {
            // divided second difference on a possibly uneven grid
            let (x0, x1, x2) = (grid[i], grid[i + 1], grid[i + 2]);
            let d1 = (w[1] - w[0]) / (x1 - x0);
            let d2 = (w[2] - w[1]) / (x2 - x1);
            max_second = max_second.max(d2 - d1);
        }
        (self.eval(0.0), min_first, max_second)
    }
}

impl fmt::Debug for BernsteinFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BernsteinFunction::Power(a) => write!(f, "Power({a})"),
            BernsteinFunction::ShiftedPower(a) => write!(f, "ShiftedPower({a})"),
            BernsteinFunction::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_values() {
        assert_eq!(BernsteinFunction::Power(0.5).eval(4.0), 2.0);
        assert_eq!(BernsteinFunction::ShiftedPower(0.5).eval(3.0), 1.0);
        assert_eq!(BernsteinFunction::Power(0.3).eval(1.0), 1.0);
    }

    #[test]
    fn builtins_are_concave_and_increasing() {
        let grid: Vec<f64> = (0..400).map(|i| i as f64 * 0.05).collect();
        for f in [
            BernsteinFunction::Power(0.3),
            BernsteinFunction::Power(0.8),
            BernsteinFunction::ShiftedPower(0.5),
        ] {
            let (f0, first, second) = f.grid_shape(&grid);
            assert_eq!(f0, 0.0);
            assert!(first >= 0.0, "{f:?}");
            assert!(second <= 1e-12, "{f:?}");
        }
    }
}
