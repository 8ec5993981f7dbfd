//! Batch-means confidence intervals for path-level Monte Carlo statistics.

use std::ops::Range;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Minimum number of batches behind every reported interval.
pub const MIN_BATCHES: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    /// Half-width of the 95% interval; zero when fewer than two batches exist.
    pub half_width: f64,
    pub batches: usize,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate {
            mean: value,
            half_width: 0.0,
            batches: 1,
        }
    }

    pub fn lower(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.half_width
    }
}

/// Contiguous, near-equal blocks of `0..n`; at most `n` blocks.
pub fn batch_ranges(n: usize, batches: usize) -> Vec<Range<usize>> {
    let b = batches.clamp(1, n.max(1));
    (0..b).map(|k| (k * n / b)..((k + 1) * n / b)).collect()
}

/// Treats `values` as i.i.d. batch statistics: mean and normal 95% half-width.
pub fn mean_ci(values: &[f64]) -> Estimate {
    let b = values.len();
    if b == 0 {
        return Estimate {
            mean: f64::NAN,
            half_width: f64::NAN,
            batches: 0,
        };
    }
    let mean = values.iter().sum::<f64>() / b as f64;
    if b < 2 {
        return Estimate {
            mean,
            half_width: 0.0,
            batches: b,
        };
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (b - 1) as f64;
    Estimate {
        mean,
        half_width: Z95 * (var / b as f64).sqrt(),
        batches: b,
    }
}

/// Batch-means estimate of `E[sample]` from per-path samples.
pub fn batch_means(samples: &[f64], batches: usize) -> Estimate {
    let means: Vec<f64> = batch_ranges(samples.len(), batches)
        .into_iter()
        .map(|r| {
            let len = r.len() as f64;
            samples[r].iter().sum::<f64>() / len
        })
        .collect();
    let mut est = mean_ci(&means);
    // the grand mean over all paths, not the mean of unequal batches
    if !samples.is_empty() {
        est.mean = samples.iter().sum::<f64>() / samples.len() as f64;
    }
    est
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Trapezoid rule on a uniform grid of spacing `dt`.
pub fn trapezoid(values: &[f64], dt: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => dt * (values[1..n - 1].iter().sum::<f64>() + 0.5 * (values[0] + values[n - 1])),
    }
}

/// Running trapezoid integrals `∫₀^{t_k}` for every grid index `k`.
pub fn cumulative_trapezoid(values: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for (k, v) in values.iter().enumerate() {
        if k > 0 {
            acc += 0.5 * dt * (values[k - 1] + v);
        }
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ranges_cover_everything_once() {
        let r = batch_ranges(205, 20);
        assert_eq!(r.len(), 20);
        assert_eq!(r[0].start, 0);
        assert_eq!(r[19].end, 205);
        assert!(r.windows(2).all(|w| w[0].end == w[1].start));
        assert_eq!(batch_ranges(3, 20).len(), 3);
    }

    #[test]
    fn constant_samples_have_zero_width() {
        let e = batch_means(&[2.5; 200], 20);
        assert_eq!(e.mean, 2.5);
        assert_eq!(e.half_width, 0.0);
        assert_eq!(e.batches, 20);
    }

    #[test]
    fn quadrature_helpers() {
        assert_eq!(trapezoid(&[0.0, 1.0, 2.0], 0.5), 1.0);
        assert_eq!(cumulative_trapezoid(&[0.0, 1.0, 2.0], 0.5), vec![0.0, 0.25, 1.0]);
        assert!((ls_slope(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]) - 2.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn interval_contains_mean(xs in prop::collection::vec(-1e3f64..1e3, 40..300)) {
            let e = batch_means(&xs, 20);
            prop_assert!(e.half_width >= 0.0);
            prop_assert!(e.lower() <= e.mean && e.mean <= e.upper());
        }
    }
}
