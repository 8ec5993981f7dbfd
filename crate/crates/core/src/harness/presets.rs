use nalgebra::DMatrix;

use crate::dirichlet::{BernsteinFunction, DirichletError, DirichletSpace};

/// Base graph of a named preset, before any fractional subordination.
#[derive(Clone, Debug, PartialEq)]
pub enum PresetGraph {
    Single,
    Path(usize),
    Complete(usize),
}

/// A preset name resolved into its graph and an optional fractional exponent.
#[derive(Clone, Debug, PartialEq)]
pub struct Preset {
    pub graph: PresetGraph,
    pub fractional: Option<f64>,
}

/// Node count of the graph `frac(α)` subordinates.
pub const FRAC_BASE_NODES: usize = 16;

/// One-line descriptions for the `presets` command.
pub const PRESET_HELP: &[(&str, &str)] = &[
    ("single", "one node, unit measure, unit killing"),
    (
        "path_<n>",
        "n-node chain, unit weights and measure, unit killing at every node plus an extra unit at the killed endpoint node 0",
    ),
    ("complete_<n>", "complete graph on n nodes, weights 1/n, unit measure and killing"),
    ("frac(<alpha>)", "path_16 subordinated by the fractional power f(λ) = λ^α, 0 < α < 1"),
];

impl Preset {
    pub fn parse(name: &str) -> Result<Self, String> {
        let name = name.trim();
        let count = |s: &str| -> Result<usize, String> {
            match s.parse::<usize>() {
                Ok(n) if n >= 1 => Ok(n),
                _ => Err(format!("preset `{name}` needs a positive node count")),
            }
        };
        let graph = if name == "single" {
            PresetGraph::Single
        } else if let Some(n) = name.strip_prefix("path_") {
            PresetGraph::Path(count(n)?)
        } else if let Some(n) = name.strip_prefix("complete_") {
            PresetGraph::Complete(count(n)?)
        } else if let Some(a) = name.strip_prefix("frac(").and_then(|r| r.strip_suffix(')')) {
            let alpha: f64 = a
                .trim()
                .parse()
                .map_err(|_| format!("preset `{name}` needs a numeric exponent"))?;
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(format!("fractional exponent must lie in (0,1), got {alpha}"));
            }
            return Ok(Preset {
                graph: PresetGraph::Path(FRAC_BASE_NODES),
                fractional: Some(alpha),
            });
        } else {
            return Err(format!("unknown preset `{name}`"));
        };
        Ok(Preset { graph, fractional: None })
    }

    pub fn build(&self) -> Result<DirichletSpace, DirichletError> {
        let base = self.graph.build()?;
        match self.fractional {
            Some(alpha) => base.subordinate(&BernsteinFunction::Power(alpha)),
            None => Ok(base),
        }
    }
}

impl PresetGraph {
    pub fn build(&self) -> Result<DirichletSpace, DirichletError> {
        match *self {
            PresetGraph::Single => DirichletSpace::build_graph_space(&DMatrix::zeros(1, 1), &[1.0], &[1.0]),
            PresetGraph::Path(n) => {
                let w = DMatrix::from_fn(n, n, |i, j| if i.abs_diff(j) == 1 { 1.0 } else { 0.0 });
                let mut killing = vec![1.0; n];
                killing[0] += 1.0;
                DirichletSpace::build_graph_space(&w, &killing, &vec![1.0; n])
            }
            PresetGraph::Complete(n) => {
                let w = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 1.0 / n as f64 });
                DirichletSpace::build_graph_space(&w, &vec![1.0; n], &vec![1.0; n])
            }
        }
    }
}

/// Builds a preset space by name.
pub fn preset_space(name: &str) -> Result<DirichletSpace, String> {
    Preset::parse(name)?.build().map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_resolve() {
        assert_eq!(Preset::parse("path_16").unwrap().graph, PresetGraph::Path(16));
        assert_eq!(Preset::parse("frac(0.5)").unwrap().fractional, Some(0.5));
        assert!(Preset::parse("frac(1.5)").is_err());
        assert!(Preset::parse("path_0").is_err());
        assert!(Preset::parse("torus").is_err());
    }

    #[test]
    fn spectra_are_bounded_away_from_zero() {
        for name in ["single", "path_2", "path_16", "complete_8", "frac(0.3)"] {
            let s = preset_space(name).unwrap();
            assert!(s.eigenvalues().min() >= 0.5, "{name}");
        }
    }
}
