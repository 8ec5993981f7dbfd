mod common;

use std::sync::Arc;

use nalgebra::DVector;
use proptest::prelude::*;

use common::*;
use dirichlet_svi::harness::{parse_config, serialize};
use dirichlet_svi::spde::{simulate, NoiseModel, SimulationConfig, DEFAULT_CLIP};
use dirichlet_svi::svi::EnergyFunctional;
use dirichlet_svi::{ConvexPotential, DualFunctional, YosidaApprox};

fn potential() -> impl Strategy<Value = ConvexPotential> {
    prop_oneof![
        (0.05f64..0.95).prop_map(|t| ConvexPotential::fast_diffusion(t).unwrap()),
        (1.1f64..4.0).prop_map(|g| ConvexPotential::porous_medium(g).unwrap()),
        Just(ConvexPotential::zhang()),
    ]
}

fn state(n: usize) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-5.0f64..5.0, n).prop_map(DVector::from_vec)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn psi_is_convex(pot in potential(), a in -8.0f64..8.0, b in -8.0f64..8.0, t in 0.0f64..1.0) {
        let m = t * a + (1.0 - t) * b;
        let rhs = t * pot.psi(a) + (1.0 - t) * pot.psi(b);
        prop_assert!(pot.psi(m) <= rhs + 1e-12 * (1.0 + rhs.abs()));
    }

    #[test]
    fn yosida_is_monotone_and_lipschitz(pot in potential(), eps in 1e-3f64..0.99, a in -8.0f64..8.0, b in -8.0f64..8.0) {
        let y = YosidaApprox::new(pot, eps).unwrap();
        let (ya, yb) = (y.yosida(a).unwrap(), y.yosida(b).unwrap());
        let scale = 1.0 + ya.abs() + yb.abs();
        prop_assert!((ya - yb) * (a - b) >= -1e-10 * scale);
        prop_assert!((ya - yb).abs() <= (a - b).abs() / eps + 1e-9 * scale);
    }

    #[test]
    fn regularized_energy_sits_below_within_gap(pot in potential(), eps in 1e-3f64..0.99, v in state(16)) {
        let s = Arc::new(space("path_16"));
        let f = EnergyFunctional::new(s, pot);
        let phi = f.phi(&v);
        let phi_eps = f.phi_eps(eps, &v).unwrap();
        let tol = 1e-10 * (1.0 + phi.abs());
        prop_assert!(phi_eps <= phi + tol);
        prop_assert!(phi - phi_eps <= f.gap_bound(eps, &v) + tol);
    }

    #[test]
    fn dual_norm_grows_as_nu_shrinks(seed in 0u64..1000, nu in 1e-6f64..10.0, shrink in 0.01f64..1.0) {
        let s = space("path_16");
        let l = DualFunctional::new(gaussian(&mut rng(seed), s.node_count()));
        let big = s.dual_norm_nu(&l, nu).unwrap();
        let small = s.dual_norm_nu(&l, nu * shrink).unwrap();
        prop_assert!(small >= big * (1.0 - 1e-12));
        prop_assert!(small <= s.dual_norm_fe(&l) * (1.0 + 1e-12));
    }

    #[test]
    fn semigroup_is_positive_and_sub_markov(t in 0.0f64..5.0, which in 0usize..PRESETS.len()) {
        let s = space(PRESETS[which]);
        let p = s.semigroup_matrix(t).unwrap();
        let ones = DVector::from_element(s.node_count(), 1.0);
        prop_assert!(p.iter().all(|&x| x >= -1e-12));
        prop_assert!((&p * ones).iter().all(|&x| x <= 1.0 + 1e-12));
    }

    #[test]
    fn config_round_trips(
        eps in 1e-3f64..0.999,
        paths in 1usize..5000,
        seed in any::<u64>(),
        steps in 1usize..500,
        sigma in 0.0f64..2.0,
        preset in prop::sample::select(vec!["single", "path_4", "complete_3", "frac(0.25)"]),
        kind in prop::sample::select(vec!["svi", "contraction", "energy", "regularity", "eps_convergence"]),
    ) {
        let text = format!(
            "experiment.kind = {kind}\nspace.preset = {preset}\npotential.kind = fast_diffusion\npotential.theta = 0.5\n\
             noise.kind = diagonal\nnoise.sigma = {sigma}\nrun.epsilon = {eps}\nrun.paths = {paths}\nrun.seed = {seed}\nrun.steps = {steps}\n"
        );
        let c = parse_config(&text).unwrap();
        prop_assert_eq!(c.run.epsilon, eps);
        let once = serialize(&c);
        let back = parse_config(&once).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(serialize(&back), once);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn trajectory_csv_layout(paths in 1usize..4, steps in 1usize..6, n in 1usize..5, seed in any::<u64>()) {
        let space = Arc::new(space(&format!("path_{n}")));
        let config = SimulationConfig {
            noise: NoiseModel::diagonal(0.2, DEFAULT_CLIP, n).unwrap(),
            space,
            potential: ConvexPotential::zhang(),
            epsilon: 0.1,
            horizon: 1.0,
            steps,
            paths,
            initial: profile(n),
            seed,
            coupling_tag: "csv".into(),
        };
        let ens = simulate(&config).unwrap();
        let mut buf = Vec::new();
        ens.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        prop_assert_eq!(lines.len(), 1 + paths * (steps + 1));
        prop_assert!(lines[0].starts_with("path,step,time,node_0"));
        for (k, line) in lines[1..].iter().enumerate() {
            let cells: Vec<&str> = line.split(',').collect();
            prop_assert_eq!(cells.len(), 3 + n);
            prop_assert_eq!(cells[0].parse::<usize>().unwrap(), k / (steps + 1));
            prop_assert_eq!(cells[1].parse::<usize>().unwrap(), k % (steps + 1));
            let value: f64 = cells[3].parse().unwrap();
            let exact = ens.paths[k / (steps + 1)].states[k % (steps + 1)][0];
            prop_assert_eq!(value, exact);
        }
    }
}
