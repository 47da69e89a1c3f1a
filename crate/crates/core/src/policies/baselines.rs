use crate::distributions::RngStream;
use crate::error::Result;
use crate::estimators::median_of_means;

use super::{check_update, BanditPolicy, DeltaRule, PolicyConfig, RucbParams};

/// `mean + sqrt(2 v ln(1/delta) / n)`.
pub fn vanilla_ucb_index(mean: f64, n: u64, delta: f64, v: f64) -> f64 {
    mean + (2.0 * v * (1.0 / delta).ln() / n as f64).sqrt()
}

/// Number of median-of-means blocks for `n` samples: `1 + floor(3.5 ln(1/delta))`
/// made odd, capped at the largest odd number not above `n`.
pub fn rucb_block_count(n: usize, delta: f64) -> usize {
    let mut wanted = 1 + (3.5 * (1.0 / delta).ln()).floor().max(0.0) as usize;
    if wanted.is_multiple_of(2) {
        wanted += 1;
    }
    let mut blocks = wanted.min(n).max(1);
    if blocks.is_multiple_of(2) {
        blocks -= 1;
    }
    blocks
}

/// Median-of-means estimate over all samples plus
/// `v^(1/alpha) (c ln(1/delta) / n)^(alpha / (1 + alpha))`.
pub fn rucb_median_index(samples: &[f64], delta: f64, params: &RucbParams) -> Result<f64> {
    let n = samples.len();
    let estimate = median_of_means(samples, rucb_block_count(n, delta))?;
    let RucbParams { alpha, v, c } = *params;
    let radius = v.powf(1.0 / alpha) * (c * (1.0 / delta).ln() / n as f64).powf(alpha / (1.0 + alpha));
    Ok(estimate + radius)
}

/// UCB1-style baseline with a running empirical mean per arm.
#[derive(Clone, Debug)]
pub struct VanillaUcb {
    name: String,
    sums: Vec<f64>,
    counts: Vec<u64>,
    round: u64,
    horizon: u64,
    delta_rule: DeltaRule,
    v: f64,
    indices: Vec<f64>,
}

impl VanillaUcb {
    pub fn new(cfg: &PolicyConfig, horizon: u64, init: &[Vec<f64>]) -> Self {
        let sums = init.iter().map(|r| r.iter().sum()).collect();
        let counts: Vec<u64> = init.iter().map(|r| r.len() as u64).collect();
        let mut policy = Self {
            name: cfg.name.clone(),
            sums,
            round: counts.iter().sum(),
            counts,
            horizon,
            delta_rule: cfg.delta_rule,
            v: cfg.ucb_v,
            indices: vec![0.0; init.len()],
        };
        for arm in 0..init.len() {
            policy.refresh(arm);
        }
        policy
    }

    fn refresh(&mut self, arm: usize) {
        let delta = self.delta_rule.resolve(self.horizon, self.round);
        let n = self.counts[arm];
        self.indices[arm] = vanilla_ucb_index(self.sums[arm] / n as f64, n, delta, self.v);
    }
}

impl BanditPolicy for VanillaUcb {
    fn name(&self) -> &str {
        &self.name
    }

    fn batch_size(&self) -> usize {
        1
    }

    fn indices(&self) -> &[f64] {
        &self.indices
    }

    fn step_counts(&self) -> Vec<u64> {
        self.counts.clone()
    }

    fn update(&mut self, arm: usize, rewards: &[f64], _rng: &mut RngStream) -> Result<()> {
        check_update(arm, self.sums.len(), rewards.len(), 1)?;
        self.sums[arm] += rewards[0];
        self.counts[arm] += 1;
        self.round += 1;
        if self.delta_rule.is_per_round() {
            for a in 0..self.sums.len() {
                self.refresh(a);
            }
        } else {
            self.refresh(arm);
        }
        Ok(())
    }
}

/// Robust UCB with a median-of-means estimator.
///
/// Keeps every reward and re-blocks the played arm's full history on each
/// update, so a step costs `O(n_i)`.
#[derive(Clone, Debug)]
pub struct RucbMedian {
    name: String,
    samples: Vec<Vec<f64>>,
    round: u64,
    horizon: u64,
    delta_rule: DeltaRule,
    params: RucbParams,
    indices: Vec<f64>,
}

impl RucbMedian {
    pub fn new(cfg: &PolicyConfig, horizon: u64, init: &[Vec<f64>]) -> Result<Self> {
        let mut policy = Self {
            name: cfg.name.clone(),
            samples: init.to_vec(),
            round: init.iter().map(|r| r.len() as u64).sum(),
            horizon,
            delta_rule: cfg.delta_rule,
            params: cfg.rucb,
            indices: vec![0.0; init.len()],
        };
        for arm in 0..init.len() {
            policy.refresh(arm)?;
        }
        Ok(policy)
    }

    fn refresh(&mut self, arm: usize) -> Result<()> {
        let delta = self.delta_rule.resolve(self.horizon, self.round);
        self.indices[arm] = rucb_median_index(&self.samples[arm], delta, &self.params)?;
        Ok(())
    }
}

impl BanditPolicy for RucbMedian {
    fn name(&self) -> &str {
        &self.name
    }

    fn batch_size(&self) -> usize {
        1
    }

    fn indices(&self) -> &[f64] {
        &self.indices
    }

    fn step_counts(&self) -> Vec<u64> {
        self.samples.iter().map(|s| s.len() as u64).collect()
    }

    fn update(&mut self, arm: usize, rewards: &[f64], _rng: &mut RngStream) -> Result<()> {
        check_update(arm, self.samples.len(), rewards.len(), 1)?;
        self.samples[arm].push(rewards[0]);
        self.round += 1;
        if self.delta_rule.is_per_round() {
            for a in 0..self.samples.len() {
                self.refresh(a)?;
            }
        } else {
            self.refresh(arm)?;
        }
        Ok(())
    }
}
