mod common;

use approx::assert_relative_eq;
use nalgebra::DVector;

use common::*;
use dirichlet_svi::{BernsteinFunction, ConvexPotential, YosidaApprox};

#[test]
fn spectral_semigroup_matches_matrix_exponential() {
    for name in PRESETS {
        let s = space(name);
        for t in [0.0, 0.01, 0.3, 1.0, 4.0] {
            let spectral = s.semigroup_matrix(t).unwrap();
            let dense = expm_semigroup(&s, t);
            assert!((spectral - &dense).amax() <= 1e-12 * dense.amax().max(1.0), "{name} t={t}");
        }
    }
}

#[test]
fn gamma_transform_matches_quadrature_at_fractional_orders() {
    let orders = [0.5, 1.5, 4.0];
    for name in ["path_16", "frac(0.3)"] {
        let s = space(name);
        let w = white_noise(&mut rng(9), &s);
        for (q, &r) in gamma_quadrature(&s, &orders, &w).iter().zip(&orders) {
            let spectral = s.gamma_transform(r, &w).unwrap();
            assert!((&spectral - q).norm() <= 1e-6 * q.norm(), "{name} r={r}");
        }
    }
}

#[test]
fn order_two_gamma_transform_is_the_resolvent() {
    let s = space("complete_8");
    let w = gaussian(&mut rng(1), 8);
    let n = s.node_count();
    let lhs = nalgebra::DMatrix::identity(n, n) - s.generator();
    let v = s.gamma_transform(2.0, &w).unwrap();
    assert_relative_eq!(lhs * v, w, epsilon = 1e-12);
}

#[test]
fn resolvent_matches_brute_force_on_piecewise_potential() {
    let pot = ConvexPotential::piecewise(vec![-1.0, 0.5], vec![[0.0, -2.0, -2.0], [0.0, 0.0, 0.0], [0.25, 1.0, -0.5625]]).unwrap();
    let h = 1e-4;
    for eps in [0.05, 0.3, 0.9] {
        let y = YosidaApprox::new(pot.clone(), eps).unwrap();
        for k in 0..=60 {
            let r = -6.0 + 0.2 * k as f64;
            let brute = brute_prox(&pot, eps, r, h, -20.0, 20.0);
            let j = y.resolvent(r).unwrap();
            assert!((j - brute).abs() <= h, "eps={eps} r={r}: {j} vs {brute}");
        }
    }
}

#[test]
fn subordinated_generator_is_a_spectral_function() {
    let s = space("path_16");
    for alpha in [0.3, 0.5, 0.8] {
        let sub = s.subordinate(&BernsteinFunction::Power(alpha)).unwrap();
        let expected = s.spectral_matrix(|l| -(l.powf(alpha)));
        assert!((sub.generator() - &expected).amax() <= 1e-12 * expected.amax(), "alpha={alpha}");
        let ones = DVector::from_element(16, 1.0);
        assert!(((sub.generator() * ones).iter()).all(|&x| x <= 1e-12));
    }
}
