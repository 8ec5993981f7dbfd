use nalgebra::DVector;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Counter-based Gaussian source: the value for `(path, step, mode)` is a pure
/// function of `(seed, tag, path, step, mode)`, independent of evaluation order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BrownianSource {
    key: [u8; 32],
}

impl BrownianSource {
    pub fn new(seed: u64, tag: &str) -> Self {
        let mut h = Sha256::new();
        h.update(seed.to_le_bytes());
        h.update(tag.as_bytes());
        BrownianSource { key: h.finalize().into() }
    }

    fn stream(&self, path: u64, step: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(path);
        // 2^32 modes per step, four 32-bit words per mode
        rng.set_word_pos(u128::from(step) << 34);
        rng
    }

    /// Standard normals for modes `0..modes` at `(path, step)`.
    pub fn normals(&self, path: u64, step: u64, modes: usize) -> DVector<f64> {
        let mut rng = self.stream(path, step);
        DVector::from_fn(modes, |_, _| {
            let u1 = 1.0 - unit(rng.next_u64());
            let u2 = unit(rng.next_u64());
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        })
    }

    /// Brownian increments `dW ~ N(0, dt I)` for one step.
    pub fn increments(&self, path: u64, step: u64, modes: usize, dt: f64) -> DVector<f64> {
        self.normals(path, step, modes) * dt.sqrt()
    }
}

/// Uniform on `[0, 1)` from the top 53 bits.
fn unit(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_function_of_counters() {
        let a = BrownianSource::new(7, "tag");
        let b = BrownianSource::new(7, "tag");
        assert_eq!(a.normals(3, 10, 5), b.normals(3, 10, 5));
        // a prefix of the modes does not depend on how many are drawn
        assert_eq!(a.normals(3, 10, 5).rows(0, 2), a.normals(3, 10, 2));
        assert_ne!(a.normals(3, 10, 5), a.normals(3, 11, 5));
        assert_ne!(a.normals(3, 10, 5), a.normals(4, 10, 5));
        assert_ne!(a.normals(3, 10, 5), BrownianSource::new(7, "other").normals(3, 10, 5));
        assert_ne!(a.normals(3, 10, 5), BrownianSource::new(8, "tag").normals(3, 10, 5));
    }

    #[test]
    fn moments_are_standard() {
        let src = BrownianSource::new(1, "moments");
        let xs: Vec<f64> = (0..20_000).flat_map(|n| src.normals(0, n, 2).iter().copied().collect::<Vec<_>>()).collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!(m.abs() < 0.03, "mean {m}");
        assert!((v - 1.0).abs() < 0.03, "variance {v}");
    }
}
