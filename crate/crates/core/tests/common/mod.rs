//! Independent oracles and sampling helpers shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dirichlet_svi::harness::preset_space;
use dirichlet_svi::{ConvexPotential, DirichletSpace};

pub const PRESETS: [&str; 7] = ["single", "path_2", "path_16", "complete_8", "frac(0.3)", "frac(0.5)", "frac(0.8)"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn space(name: &str) -> DirichletSpace {
    preset_space(name).unwrap()
}

/// Built-in potentials, with the exponents used throughout the suite.
pub fn builtin_potentials() -> Vec<ConvexPotential> {
    vec![
        ConvexPotential::fast_diffusion(0.5).unwrap(),
        ConvexPotential::porous_medium(2.0).unwrap(),
        ConvexPotential::porous_medium(3.0).unwrap(),
        ConvexPotential::zhang(),
    ]
}

/// The two potentials that satisfy the linear growth bound.
pub fn linear_growth_potentials() -> Vec<ConvexPotential> {
    vec![ConvexPotential::zhang(), ConvexPotential::fast_diffusion(0.5).unwrap()]
}

pub fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| {
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random::<f64>();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    })
}

/// White noise on the measure space, `ξ_i / √μ_i`.
pub fn white_noise(rng: &mut ChaCha8Rng, space: &DirichletSpace) -> DVector<f64> {
    let mut w = gaussian(rng, space.node_count());
    for (x, m) in w.iter_mut().zip(space.measure().iter()) {
        *x /= m.sqrt();
    }
    w
}

/// Bessel-regular random state `(1 − L)^{-1} w` for white noise `w`.
pub fn smooth_state(rng: &mut ChaCha8Rng, space: &DirichletSpace) -> DVector<f64> {
    let w = white_noise(rng, space);
    space.gamma_transform(2.0, &w).unwrap()
}

/// Grid argmin of `|r − s|²/(2ε) + ψ(s)` with step `h` on `[lo, hi]`.
///
/// The objective is strictly convex, so its restriction to the grid is
/// unimodal and the fine-grid argmin lies within one coarse cell of the
/// coarse-grid argmin; scanning the coarse grid first and refining there
/// returns exactly the argmin of the full fine grid.
pub fn brute_prox(potential: &ConvexPotential, eps: f64, r: f64, h: f64, lo: f64, hi: f64) -> f64 {
    let f = |s: f64| (r - s) * (r - s) / (2.0 * eps) + potential.psi(s);
    let coarse = 100.0 * h;
    let n = ((hi - lo) / coarse).round() as i64;
    let mut best = (f64::INFINITY, lo);
    for k in 0..=n {
        let s = lo + k as f64 * coarse;
        let v = f(s);
        if v < best.0 {
            best = (v, s);
        }
    }
    let centre = best.1;
    let mut fine = (f64::INFINITY, centre);
    for k in -100..=100 {
        let s = centre + k as f64 * h;
        if s < lo || s > hi {
            continue;
        }
        let v = f(s);
        if v < fine.0 {
            fine = (v, s);
        }
    }
    fine.1
}

/// `P_t` by dense matrix exponential of `tL`, independent of the spectral code.
pub fn expm_semigroup(space: &DirichletSpace, t: f64) -> DMatrix<f64> {
    (space.generator() * t).exp()
}

/// Γ-transform `(1 − L)^{-r/2} w = Γ(r/2)^{-1} ∫₀^∞ t^{r/2−1} e^{−t} P_t w dt`
/// by the substitution `t = e^s` and the trapezoid rule in `s`, with `P_t`
/// from the matrix exponential. Returns one result per order in `orders`.
pub fn gamma_quadrature(space: &DirichletSpace, orders: &[f64], w: &DVector<f64>) -> Vec<DVector<f64>> {
    let (s_lo, s_hi, nodes) = (-70.0f64, 4.5f64, 7451usize);
    let h = (s_hi - s_lo) / (nodes - 1) as f64;
    let mut sums = vec![DVector::zeros(w.len()); orders.len()];
    for k in 0..nodes {
        let s = s_lo + k as f64 * h;
        let t = s.exp();
        let pw = expm_semigroup(space, t) * w;
        let weight = if k == 0 || k == nodes - 1 { 0.5 * h } else { h };
        for (sum, &r) in sums.iter_mut().zip(orders) {
            let kernel = (0.5 * r * s - t).exp();
            *sum += &pw * (weight * kernel);
        }
    }
    sums.into_iter()
        .zip(orders)
        .map(|(s, &r)| s / statrs::function::gamma::gamma(0.5 * r))
        .collect()
}

/// Smooth preset initial profile with both signs.
pub fn profile(n: usize) -> DVector<f64> {
    DVector::from_fn(n, |i, _| 2.0 * (std::f64::consts::PI * (i as f64 + 0.5) / n as f64).sin() - 0.5)
}
