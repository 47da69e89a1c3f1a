//! Robust aggregation primitives: clipping, medians and (smoothed) median of means.

use serde::{Deserialize, Serialize};

use crate::distributions::RngStream;
use crate::error::{invalid, Error, Result};

/// Shape of the smoothed median of means: `2m+1` blocks of `n` samples,
/// each block mean perturbed by `theta` times a standard Gaussian.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmomConfig {
    pub m: usize,
    pub n: usize,
    #[serde(default)]
    pub theta: f64,
}

impl SmomConfig {
    pub fn new(m: usize, n: usize, theta: f64) -> Result<Self> {
        Self { m, n, theta }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if self.n == 0 {
            return Err(invalid("n", "block size must be positive"));
        }
        if !(self.theta >= 0.0 && self.theta.is_finite()) {
            return Err(invalid(
                "theta",
                format!("must be finite and nonnegative, got {}", self.theta),
            ));
        }
        Ok(self)
    }

    pub fn blocks(&self) -> usize {
        2 * self.m + 1
    }

    /// Samples consumed per estimate, `(2m+1) n`.
    pub fn batch_size(&self) -> usize {
        self.blocks() * self.n
    }
}

/// Clip `v` to `[-lambda, lambda]`, i.e. `v * min(1, lambda / |v|)`.
pub fn clip(v: f64, lambda: f64) -> f64 {
    debug_assert!(lambda >= 0.0);
    if v.abs() <= lambda {
        v
    } else {
        lambda.copysign(v)
    }
}

/// Median of a scratch buffer, reordered in place. Even counts average the
/// two middle values. Panics on an empty slice.
pub fn median_in_place(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty slice");
    let len = values.len();
    let mid = len / 2;
    let (lower, upper_mid, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    let upper_mid = *upper_mid;
    if len % 2 == 1 {
        upper_mid
    } else {
        let lower_mid = lower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower_mid + upper_mid)
    }
}

pub fn median(values: &[f64]) -> f64 {
    median_in_place(&mut values.to_vec())
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Smoothed median of means over consecutive blocks of `cfg.n` samples.
///
/// Gaussian perturbations are drawn from `rng` only when `theta > 0`, one
/// per block in block order.
pub fn smom(samples: &[f64], cfg: &SmomConfig, rng: &mut RngStream) -> Result<f64> {
    if samples.len() != cfg.batch_size() {
        return Err(Error::LengthMismatch {
            expected: cfg.batch_size(),
            actual: samples.len(),
        });
    }
    let mut block_means: Vec<f64> = samples
        .chunks_exact(cfg.n)
        .map(|block| {
            let noise = if cfg.theta > 0.0 {
                cfg.theta * rng.standard_normal()
            } else {
                0.0
            };
            mean(block) + noise
        })
        .collect();
    Ok(median_in_place(&mut block_means))
}

/// Median of the means of `blocks` contiguous groups whose sizes differ by
/// at most one (the first `len % blocks` groups get the extra sample).
pub fn median_of_means(samples: &[f64], blocks: usize) -> Result<f64> {
    if blocks == 0 {
        return Err(invalid("blocks", "must be positive"));
    }
    if blocks > samples.len() {
        return Err(invalid(
            "blocks",
            format!("{blocks} blocks exceed {} samples", samples.len()),
        ));
    }
    let base = samples.len() / blocks;
    let extra = samples.len() % blocks;
    let mut means = Vec::with_capacity(blocks);
    let mut start = 0;
    for j in 0..blocks {
        let size = base + usize::from(j < extra);
        means.push(mean(&samples[start..start + size]));
        start += size;
    }
    Ok(median_in_place(&mut means))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::NoiseModel;
    use proptest::prelude::*;

    fn rng() -> RngStream {
        RngStream::new(0, 0)
    }

    #[test]
    fn clip_examples() {
        assert_eq!(clip(5.0, 2.0), 2.0);
        assert_eq!(clip(-3.0, 2.0), -2.0);
        assert_eq!(clip(1.5, 2.0), 1.5);
        assert_eq!(clip(1.5, 0.0), 0.0);
    }

    #[test]
    fn smom_examples() {
        let cfg = SmomConfig::new(1, 2, 0.0).unwrap();
        let v = smom(&[0.0, 2.0, 10.0, 12.0, 4.0, 6.0], &cfg, &mut rng()).unwrap();
        assert_eq!(v, 5.0);
        let single = SmomConfig::new(0, 1, 0.0).unwrap();
        assert_eq!(smom(&[7.0], &single, &mut rng()).unwrap(), 7.0);
        let three = SmomConfig::new(1, 1, 0.0).unwrap();
        assert_eq!(smom(&[1.0, 5.0, 100.0], &three, &mut rng()).unwrap(), 5.0);
    }

    #[test]
    fn smom_rejects_wrong_length() {
        let cfg = SmomConfig::new(1, 2, 0.0).unwrap();
        assert_eq!(
            smom(&[1.0; 5], &cfg, &mut rng()),
            Err(Error::LengthMismatch {
                expected: 6,
                actual: 5
            })
        );
    }

    #[test]
    fn smom_config_rejects_bad_values() {
        assert!(SmomConfig::new(1, 0, 0.0).is_err());
        assert!(SmomConfig::new(1, 1, -0.1).is_err());
    }

    #[test]
    fn median_of_means_examples() {
        let s: Vec<f64> = (1..=9).map(f64::from).collect();
        assert_eq!(median_of_means(&s, 3).unwrap(), 5.0);
        assert_eq!(median_of_means(&[4.0], 1).unwrap(), 4.0);
        assert!(median_of_means(&[1.0, 2.0], 3).is_err());
        assert!(median_of_means(&[1.0, 2.0], 0).is_err());
    }

    #[test]
    fn median_of_means_uneven_blocks() {
        // sizes 3, 2, 2 -> means 2, 4.5, 6.5
        let s: Vec<f64> = (1..=7).map(f64::from).collect();
        assert_eq!(median_of_means(&s, 3).unwrap(), 4.5);
    }

    #[test]
    fn even_median_averages_middle_pair() {
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
    }

    /// A block mean of Cauchy(1) draws is again Cauchy(1), so the estimate is
    /// the median of 9 standard Cauchy variables; its coverage of
    /// `[-1.5, 1.5]` follows from a binomial tail.
    fn median_of_nine_cauchy_coverage(half_width: f64) -> f64 {
        let p_out = 0.5 - half_width.atan() / std::f64::consts::PI;
        let binom = |k: u32| -> f64 {
            let c: f64 = (0..k).map(|i| f64::from(9 - i) / f64::from(i + 1)).product();
            c * p_out.powi(k as i32) * (1.0 - p_out).powi(9 - k as i32)
        };
        1.0 - 2.0 * (5..=9).map(binom).sum::<f64>()
    }

    #[test]
    fn median_of_means_coverage_under_cauchy_noise() {
        let noise = NoiseModel::cauchy(1.0).unwrap();
        let reps = 1000;
        let inside = (0..reps)
            .filter(|&rep| {
                let mut r = RngStream::new(rep, 17);
                let s: Vec<f64> = (0..200).map(|_| noise.sample(&mut r)).collect();
                median_of_means(&s, 9).unwrap().abs() <= 1.5
            })
            .count() as f64;
        let p = median_of_nine_cauchy_coverage(1.5);
        assert!((p - 0.97045).abs() < 1e-4);
        let sd = (reps as f64 * p * (1.0 - p)).sqrt();
        assert!((inside - reps as f64 * p).abs() <= 4.0 * sd, "{inside}/{reps}");
    }

    fn sorted_block_median(samples: &[f64], m: usize, n: usize) -> f64 {
        let mut means: Vec<f64> = (0..2 * m + 1)
            .map(|j| samples[j * n..(j + 1) * n].iter().sum::<f64>() / n as f64)
            .collect();
        means.sort_by(|a, b| a.partial_cmp(b).unwrap());
        means[m]
    }

    fn smom_case() -> impl Strategy<Value = (usize, usize, Vec<f64>)> {
        (0usize..=3, 1usize..=4).prop_flat_map(|(m, n)| {
            (
                Just(m),
                Just(n),
                prop::collection::vec(-1e6f64..1e6, (2 * m + 1) * n),
            )
        })
    }

    proptest! {
        #[test]
        fn clip_magnitude_and_sign(v in -1e9f64..1e9, lambda in 1e-6f64..1e9) {
            prop_assume!(v != 0.0);
            let c = clip(v, lambda);
            prop_assert_eq!(c.abs(), v.abs().min(lambda));
            prop_assert_eq!(c.signum(), v.signum());
        }

        #[test]
        fn smom_matches_sorting_oracle((m, n, s) in smom_case()) {
            let cfg = SmomConfig::new(m, n, 0.0).unwrap();
            prop_assert_eq!(smom(&s, &cfg, &mut rng()).unwrap(), sorted_block_median(&s, m, n));
        }

        #[test]
        fn smom_shift_equivariant((m, n, s) in smom_case(), c in -100.0f64..100.0, theta in 0.0f64..3.0) {
            let cfg = SmomConfig::new(m, n, theta).unwrap();
            let shifted: Vec<f64> = s.iter().map(|x| x + c).collect();
            let base = smom(&s, &cfg, &mut RngStream::new(9, 1)).unwrap();
            let moved = smom(&shifted, &cfg, &mut RngStream::new(9, 1)).unwrap();
            prop_assert!((moved - (base + c)).abs() <= 1e-9 * (1.0 + base.abs() + c.abs()));
        }

        #[test]
        fn smom_scale_equivariant((m, n, s) in smom_case(), c in -10.0f64..10.0) {
            let cfg = SmomConfig::new(m, n, 0.0).unwrap();
            let scaled: Vec<f64> = s.iter().map(|x| x * c).collect();
            let base = smom(&s, &cfg, &mut rng()).unwrap();
            let moved = smom(&scaled, &cfg, &mut rng()).unwrap();
            prop_assert!((moved - base * c).abs() <= 1e-9 * (1.0 + (base * c).abs()));
        }
    }
}
