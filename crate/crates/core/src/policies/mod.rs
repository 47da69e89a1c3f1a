//! Bandit policies behind a single [`BanditPolicy`] interface.
//!
//! * [`ClippedSgdUcb`]: per-arm clipped SGD with an SMoM gradient estimate and
//!   the first-order index `x + sqrt(2 g(n))`.
//! * [`GenericUcb`]: the first- or zero-order index template around any
//!   [`BoundedOptimizer`].
//! * [`VanillaUcb`] and [`RucbMedian`]: baselines.

mod baselines;
mod clipped;
mod generic;

pub use baselines::{rucb_block_count, rucb_median_index, vanilla_ucb_index, RucbMedian, VanillaUcb};
pub use clipped::{fo_ucb_index, ArmState, ClippedSgdUcb};
pub use generic::{zo_ucb_index, BoundedOptimizer, ClippedSgdOptimizer, GenericUcb, IndexOrder};

use serde::{Deserialize, Serialize};

use crate::clipped_sgd::Schedule;
use crate::distributions::RngStream;
use crate::error::{invalid, Error, Result};
use crate::estimators::SmomConfig;

pub const SGD_UCB: &str = "SGD-UCB";
pub const SGD_UCB_MEDIAN: &str = "SGD-UCB-Median";
pub const SGD_UCB_SMOM: &str = "SGD-UCB-SMoM";
pub const RUCB_MEDIAN: &str = "RUCB-Median";
pub const UCB: &str = "UCB";

/// Every policy name accepted by [`PolicyConfig::named`].
pub const POLICY_NAMES: [&str; 5] = [SGD_UCB, SGD_UCB_MEDIAN, SGD_UCB_SMOM, RUCB_MEDIAN, UCB];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyFamily {
    ClippedSgdUcb,
    VanillaUcb,
    RucbMedian,
    GenericFoUcb,
    GenericZoUcb,
}

/// How the confidence level `delta` is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum DeltaRule {
    /// `1 / T^2` for the horizon `T`.
    OneOverT2,
    /// `1 / (T (T+1))` for the horizon `T`.
    #[default]
    OneOverTTplus1,
    /// `1 / t^2` re-evaluated at the current round `t`.
    PerRound,
    Fixed(f64),
}

impl DeltaRule {
    pub fn resolve(&self, horizon: u64, round: u64) -> f64 {
        let sq = |t: u64| {
            let t = t.max(1) as f64;
            1.0 / (t * t)
        };
        match *self {
            DeltaRule::OneOverT2 => sq(horizon),
            DeltaRule::OneOverTTplus1 => {
                let t = horizon.max(1) as f64;
                1.0 / (t * (t + 1.0))
            }
            DeltaRule::PerRound => sq(round),
            DeltaRule::Fixed(d) => d,
        }
    }

    pub fn is_per_round(&self) -> bool {
        matches!(self, DeltaRule::PerRound)
    }

    pub fn validated(self) -> Result<Self> {
        if let DeltaRule::Fixed(d) = self {
            if !(d > 0.0 && d <= 1.0) {
                return Err(invalid("delta", format!("must lie in (0, 1], got {d}")));
            }
        }
        Ok(self)
    }
}

/// `R`, `L` and `C` of the per-arm clipped-SGD schedule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleParams {
    pub r: f64,
    pub l: f64,
    pub c: f64,
}

impl Default for ScheduleParams {
    fn default() -> Self {
        Self {
            r: 1.0,
            l: 1.0,
            c: 1.0,
        }
    }
}

impl ScheduleParams {
    /// Empirically tuned values for the desk-scale experiments. The defaults
    /// make `gamma` so small that iterates barely leave their initial medians
    /// within 10^4 pulls.
    pub fn tuned() -> Self {
        Self {
            r: 1000.0,
            l: 1e-3,
            c: 1e-3,
        }
    }

    pub fn schedule(&self, horizon: u64, delta: f64) -> Result<Schedule> {
        Schedule::new(horizon, delta, self.r, self.l, self.c)
    }
}

/// Confidence-radius parameters of the median-of-means baseline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RucbParams {
    pub alpha: f64,
    pub v: f64,
    pub c: f64,
}

impl Default for RucbParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            v: 1.0,
            c: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    pub name: String,
    pub family: PolicyFamily,
    pub smom: SmomConfig,
    /// Initial pulls per arm; odd so that the initial median is a sample.
    pub p: usize,
    pub delta_rule: DeltaRule,
    pub schedule: ScheduleParams,
    pub rucb: RucbParams,
    /// Variance proxy of the vanilla UCB radius.
    pub ucb_v: f64,
}

impl PolicyConfig {
    fn base(name: &str, family: PolicyFamily, m: usize, n: usize) -> Self {
        Self {
            name: name.to_string(),
            family,
            smom: SmomConfig { m, n, theta: 0.0 },
            p: 3,
            delta_rule: DeltaRule::OneOverTTplus1,
            schedule: ScheduleParams::default(),
            rucb: RucbParams::default(),
            ucb_v: 1.0,
        }
    }

    pub fn sgd_ucb() -> Self {
        Self::base(SGD_UCB, PolicyFamily::ClippedSgdUcb, 0, 1)
    }

    pub fn sgd_ucb_median() -> Self {
        Self::base(SGD_UCB_MEDIAN, PolicyFamily::ClippedSgdUcb, 1, 1)
    }

    pub fn sgd_ucb_smom() -> Self {
        Self::base(SGD_UCB_SMOM, PolicyFamily::ClippedSgdUcb, 1, 2)
    }

    /// Baselines start from a single pull per arm.
    pub fn rucb_median() -> Self {
        Self::base(RUCB_MEDIAN, PolicyFamily::RucbMedian, 0, 1).with_p(1)
    }

    pub fn ucb() -> Self {
        Self {
            delta_rule: DeltaRule::PerRound,
            p: 1,
            ..Self::base(UCB, PolicyFamily::VanillaUcb, 0, 1)
        }
    }

    /// Look up a policy by its display name (case-insensitive).
    pub fn named(name: &str) -> Result<Self> {
        let cfg = match name.to_ascii_lowercase().as_str() {
            "sgd-ucb" => Self::sgd_ucb(),
            "sgd-ucb-median" => Self::sgd_ucb_median(),
            "sgd-ucb-smom" => Self::sgd_ucb_smom(),
            "rucb-median" => Self::rucb_median(),
            "ucb" => Self::ucb(),
            _ => {
                return Err(Error::Unknown {
                    what: "policy",
                    name: name.to_string(),
                })
            }
        };
        Ok(cfg)
    }

    pub fn with_p(mut self, p: usize) -> Self {
        self.p = p;
        self
    }

    pub fn with_schedule(mut self, schedule: ScheduleParams) -> Self {
        self.schedule = schedule;
        self
    }

    /// Raw samples consumed by one policy step after initialization.
    pub fn batch_size(&self) -> usize {
        match self.family {
            PolicyFamily::ClippedSgdUcb | PolicyFamily::GenericFoUcb => self.smom.batch_size(),
            _ => 1,
        }
    }

    pub fn validated(self) -> Result<Self> {
        if self.p == 0 || self.p.is_multiple_of(2) {
            return Err(invalid("p", format!("must be a positive odd integer, got {}", self.p)));
        }
        self.smom.validated()?;
        self.delta_rule.validated()?;
        let is_sgd = matches!(
            self.family,
            PolicyFamily::ClippedSgdUcb | PolicyFamily::GenericFoUcb
        );
        if is_sgd && self.delta_rule.is_per_round() {
            return Err(invalid(
                "delta_rule",
                "clipped-SGD schedules need a horizon-based delta",
            ));
        }
        let RucbParams { alpha, v, c } = self.rucb;
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(invalid("rucb.alpha", format!("must lie in (0, 1], got {alpha}")));
        }
        if !(v > 0.0) || !(c > 0.0) {
            return Err(invalid("rucb", "v and c must be positive"));
        }
        if !(self.ucb_v > 0.0) {
            return Err(invalid("ucb_v", "must be positive"));
        }
        // surface schedule errors before any trial runs
        if is_sgd {
            self.schedule.schedule(1000, 0.01)?;
        }
        Ok(self)
    }

    /// Initialize a policy: every arm is pulled `p` times through `feed`.
    ///
    /// `horizon` is the number of policy rounds the run may last; it sets the
    /// optimizer horizon and horizon-based confidence levels.
    pub fn build(
        &self,
        arms: usize,
        horizon: u64,
        feed: &mut dyn FnMut(usize) -> Result<f64>,
        rng: &mut RngStream,
    ) -> Result<Box<dyn BanditPolicy>> {
        if arms == 0 {
            return Err(invalid("arms", "must be positive"));
        }
        if horizon == 0 {
            return Err(invalid("horizon", "must be positive"));
        }
        let init = initial_rewards(arms, self.p, feed)?;
        let policy: Box<dyn BanditPolicy> = match self.family {
            PolicyFamily::ClippedSgdUcb => {
                Box::new(ClippedSgdUcb::new(self, horizon, &init)?)
            }
            PolicyFamily::VanillaUcb => Box::new(VanillaUcb::new(self, horizon, &init)),
            PolicyFamily::RucbMedian => Box::new(RucbMedian::new(self, horizon, &init)?),
            PolicyFamily::GenericFoUcb => {
                let delta = self.delta_rule.resolve(horizon, 0);
                let optimizer = ClippedSgdOptimizer::new(
                    self.schedule.schedule(horizon, delta)?,
                    self.smom,
                );
                Box::new(GenericUcb::new(
                    &self.name,
                    IndexOrder::FirstOrder,
                    Box::new(optimizer),
                    &init,
                    rng,
                )?)
            }
            PolicyFamily::GenericZoUcb => {
                return Err(invalid(
                    "family",
                    "zero-order UCB needs an optimizer supplied through GenericUcb::new",
                ))
            }
        };
        Ok(policy)
    }
}

fn initial_rewards(
    arms: usize,
    p: usize,
    feed: &mut dyn FnMut(usize) -> Result<f64>,
) -> Result<Vec<Vec<f64>>> {
    (0..arms)
        .map(|arm| (0..p).map(|_| feed(arm)).collect())
        .collect()
}

/// A bandit policy after initialization.
pub trait BanditPolicy: Send {
    fn name(&self) -> &str;

    fn arms(&self) -> usize {
        self.indices().len()
    }

    /// Raw rewards expected by [`BanditPolicy::update`].
    fn batch_size(&self) -> usize;

    /// Current UCB indices, one per arm.
    fn indices(&self) -> &[f64];

    /// Per-arm step counters `n_i` (initialization counts as one step for
    /// optimizer-based policies, `p` raw samples for the baselines).
    fn step_counts(&self) -> Vec<u64>;

    /// Arm with the largest index; ties go to the lowest index.
    fn select_arm(&self) -> usize {
        argmax(self.indices())
    }

    fn update(&mut self, arm: usize, rewards: &[f64], rng: &mut RngStream) -> Result<()>;
}

/// First index of the maximum; NaN entries never win.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] || values[best].is_nan() {
            best = i;
        }
    }
    best
}

pub(crate) fn check_update(arm: usize, arms: usize, got: usize, expected: usize) -> Result<()> {
    if arm >= arms {
        return Err(Error::ArmOutOfRange { arm, arms });
    }
    if got != expected {
        return Err(Error::LengthMismatch {
            expected,
            actual: got,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_ties_go_low() {
        assert_eq!(argmax(&[1.0, 3.0, 2.0]), 1);
        assert_eq!(argmax(&[2.0, 2.0]), 0);
        assert_eq!(argmax(&[5.0]), 0);
        assert_eq!(argmax(&[f64::NAN, 1.0]), 1);
    }

    #[test]
    fn variant_mapping() {
        assert_eq!(PolicyConfig::sgd_ucb().batch_size(), 1);
        assert_eq!(PolicyConfig::sgd_ucb_median().batch_size(), 3);
        assert_eq!(PolicyConfig::sgd_ucb_smom().batch_size(), 6);
        assert_eq!(PolicyConfig::rucb_median().batch_size(), 1);
        for name in POLICY_NAMES {
            assert_eq!(PolicyConfig::named(name).unwrap().name, name);
        }
        assert!(PolicyConfig::named("thompson").is_err());
    }

    #[test]
    fn config_validation() {
        assert!(PolicyConfig::sgd_ucb().with_p(2).validated().is_err());
        assert!(PolicyConfig::sgd_ucb().with_p(0).validated().is_err());
        assert!(PolicyConfig::sgd_ucb().with_p(5).validated().is_ok());
        let mut per_round = PolicyConfig::sgd_ucb();
        per_round.delta_rule = DeltaRule::PerRound;
        assert!(per_round.validated().is_err());
        let mut bad_alpha = PolicyConfig::rucb_median();
        bad_alpha.rucb.alpha = 1.5;
        assert!(bad_alpha.validated().is_err());
    }

    #[test]
    fn delta_rules() {
        assert_eq!(DeltaRule::OneOverT2.resolve(10, 3), 0.01);
        assert_eq!(DeltaRule::OneOverTTplus1.resolve(10, 3), 1.0 / 110.0);
        assert_eq!(DeltaRule::PerRound.resolve(10, 4), 1.0 / 16.0);
        assert_eq!(DeltaRule::Fixed(0.2).resolve(10, 4), 0.2);
        assert!(DeltaRule::Fixed(1.5).validated().is_err());
    }

    #[test]
    fn init_pulls_each_arm_p_times() {
        let mut calls = vec![0usize; 2];
        let mut feed = |arm: usize| {
            calls[arm] += 1;
            Ok(arm as f64)
        };
        let cfg = PolicyConfig::sgd_ucb_smom();
        cfg.build(2, 100, &mut feed, &mut RngStream::new(0, 0)).unwrap();
        assert_eq!(calls, vec![3, 3]);
    }

    #[test]
    fn zero_order_family_needs_explicit_optimizer() {
        let mut cfg = PolicyConfig::sgd_ucb();
        cfg.family = PolicyFamily::GenericZoUcb;
        let mut feed = |_arm: usize| Ok(0.0);
        assert!(cfg.build(2, 10, &mut feed, &mut RngStream::new(0, 0)).is_err());
    }
}
