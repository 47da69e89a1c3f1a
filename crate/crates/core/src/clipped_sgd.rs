//! Clipped SGD on `f(x) = (x - mu)^2 / 2` with a high-probability bounding
//! function, the optimizer behind the clipped-SGD UCB index.
//!
//! With horizon `K`, confidence `delta`, initial distance bound `R` and
//! smoothness `L`, the step size is
//!
//! ```text
//! gamma    = min( 1 / (400 L ln(4(K+1)/delta)), ln((K+1) R^2) / (K+1) )
//! lambda_k = exp(-gamma (1 + k/2)) R / (120 gamma ln(4(K+1)/delta))
//! g(k)     = C ln(4(K+1)/delta) ln^2((K+1) R^2) / (k+1)
//! ```
//!
//! and `f(x_k) - f* <= g(k)` holds with probability at least `1 - delta`.

use serde::{Deserialize, Serialize};

use crate::distributions::{NoiseModel, RngStream};
use crate::error::{invalid, Result};
use crate::estimators::{clip, smom, SmomConfig};

/// Step-size, clipping and bound parameters for one optimizer run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    horizon: u64,
    delta: f64,
    r: f64,
    l: f64,
    c: f64,
    gamma: f64,
}

impl Schedule {
    pub fn new(horizon: u64, delta: f64, r: f64, l: f64, c: f64) -> Result<Self> {
        if horizon == 0 {
            return Err(invalid("horizon", "must be positive"));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(invalid("delta", format!("must lie in (0, 1], got {delta}")));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(invalid("R", format!("must be positive, got {r}")));
        }
        if !(l > 0.0 && l.is_finite()) {
            return Err(invalid("L", format!("must be positive, got {l}")));
        }
        if !(c >= 0.0 && c.is_finite()) {
            return Err(invalid("C", format!("must be nonnegative, got {c}")));
        }
        let k1 = horizon as f64 + 1.0;
        if k1 * r * r <= 1.0 {
            return Err(invalid(
                "R",
                format!("(horizon + 1) * R^2 must exceed 1, got {}", k1 * r * r),
            ));
        }
        let log_conf = (4.0 * k1 / delta).ln();
        let gamma = (1.0 / (400.0 * l * log_conf)).min((k1 * r * r).ln() / k1);
        Ok(Self {
            horizon,
            delta,
            r,
            l,
            c,
            gamma,
        })
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `ln(4(K+1)/delta)`
    pub fn log_confidence(&self) -> f64 {
        (4.0 * (self.horizon as f64 + 1.0) / self.delta).ln()
    }

    /// Numerator of `g`: `C ln(4(K+1)/delta) ln^2((K+1) R^2)`.
    pub fn bound_numerator(&self) -> f64 {
        self.c * self.log_confidence() * self.log_radius().powi(2)
    }

    fn log_radius(&self) -> f64 {
        ((self.horizon as f64 + 1.0) * self.r * self.r).ln()
    }

    pub fn with_c(self, c: f64) -> Result<Self> {
        Self::new(self.horizon, self.delta, self.r, self.l, c)
    }

    /// Clipping level after `k` steps.
    pub fn clip_level_at(&self, k: u64) -> f64 {
        let decay = (-self.gamma * (1.0 + k as f64 / 2.0)).exp();
        decay * self.r / (120.0 * self.gamma * self.log_confidence())
    }
}

/// Bounding function `g(k, delta)`.
pub fn g_bound(k: u64, schedule: &Schedule) -> f64 {
    schedule.bound_numerator() / (k as f64 + 1.0)
}

/// Continuous inverse of [`g_bound`] in `k`: `A / epsilon - 1`.
pub fn g_inverse(epsilon: f64, schedule: &Schedule) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(invalid(
            "epsilon",
            format!("must be positive, got {epsilon}"),
        ));
    }
    Ok(schedule.bound_numerator() / epsilon - 1.0)
}

/// First-order oracle of `(x - mu)^2 / 2` fed with one reward sample.
pub fn gradient_oracle(x: f64, reward: f64) -> f64 {
    x - reward
}

/// Iterate and step counter of one clipped-SGD run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimizerState {
    pub x: f64,
    pub k: u64,
    pub schedule: Schedule,
    /// Steps taken while `k` was already at or past the horizon.
    pub overruns: u64,
}

impl OptimizerState {
    pub fn new(x: f64, k: u64, schedule: Schedule) -> Self {
        Self {
            x,
            k,
            schedule,
            overruns: 0,
        }
    }

    pub fn clip_level(&self) -> f64 {
        self.schedule.clip_level_at(self.k)
    }

    pub fn g_bound(&self) -> f64 {
        g_bound(self.k, &self.schedule)
    }
}

/// Clipping level `lambda_k` at the state's step count.
pub fn clip_level(state: &OptimizerState) -> f64 {
    state.clip_level()
}

/// One clipped step `x - gamma * clip(grad, lambda_k)`.
pub fn sgd_step(state: &OptimizerState, grad_estimate: f64) -> OptimizerState {
    sgd_step_with(state, grad_estimate, state.schedule.gamma, state.clip_level())
}

pub(crate) fn sgd_step_with(
    state: &OptimizerState,
    grad_estimate: f64,
    gamma: f64,
    lambda: f64,
) -> OptimizerState {
    let overruns = state.overruns + u64::from(state.k >= state.schedule.horizon);
    OptimizerState {
        x: state.x - gamma * clip(grad_estimate, lambda),
        k: state.k + 1,
        schedule: state.schedule,
        overruns,
    }
}

/// Gradient estimate at `x` from a batch of rewards: SMoM over the
/// per-sample gradients `x - reward`.
pub fn batch_gradient(
    x: f64,
    rewards: &[f64],
    cfg: &SmomConfig,
    rng: &mut RngStream,
) -> Result<f64> {
    let grads: Vec<f64> = rewards.iter().map(|&r| gradient_oracle(x, r)).collect();
    smom(&grads, cfg, rng)
}

/// A standalone clipped-SGD run on `(x - mu)^2 / 2` with noisy rewards `mu + xi`.
#[derive(Clone, Debug)]
pub struct SgdRun {
    pub schedule: Schedule,
    pub estimator: SmomConfig,
    pub mu: f64,
    pub x0: f64,
    pub noise: NoiseModel,
}

impl SgdRun {
    /// Run `steps` iterations, calling `observe(k, x_k)` for `k = 0..=steps`.
    pub fn run(
        &self,
        steps: u64,
        noise_rng: &mut RngStream,
        smoothing_rng: &mut RngStream,
        mut observe: impl FnMut(u64, f64),
    ) -> Result<OptimizerState> {
        let mut state = OptimizerState::new(self.x0, 0, self.schedule);
        let mut rewards = vec![0.0; self.estimator.batch_size()];
        observe(0, state.x);
        for _ in 0..steps {
            for r in rewards.iter_mut() {
                *r = self.mu + self.noise.sample(noise_rng);
            }
            let grad = batch_gradient(state.x, &rewards, &self.estimator, smoothing_rng)?;
            state = sgd_step(&state, grad);
            observe(state.k, state.x);
        }
        Ok(state)
    }

    /// Suboptimality `f(x_k) - f*` at each requested checkpoint.
    pub fn suboptimality_at(&self, checkpoints: &[u64], seed: u64) -> Result<Vec<f64>> {
        let steps = checkpoints.iter().copied().max().unwrap_or(0);
        let mut out = vec![f64::NAN; checkpoints.len()];
        let mu = self.mu;
        self.run(
            steps,
            &mut RngStream::new(seed, 0),
            &mut RngStream::new(seed, 1),
            |k, x| {
                for (slot, &c) in out.iter_mut().zip(checkpoints) {
                    if c == k {
                        *slot = 0.5 * (x - mu).powi(2);
                    }
                }
            },
        )?;
        Ok(out)
    }
}

/// Result of fitting the bound constant `C` from pilot runs.
#[derive(Clone, Debug, Serialize)]
pub struct Calibration {
    /// Smallest `C` for which the bound held in at least `1 - delta` of the pilots.
    pub c: f64,
    /// Per-pilot smallest `C` that covers every step of that run.
    pub per_run: Vec<f64>,
    pub coverage: f64,
}

/// Fit `C` so that `f(x_k) - f* <= g(k)` for every `k` in `1..=horizon`
/// holds in at least a `1 - delta` fraction of `pilots` seeded runs.
///
/// Pilots start at the worst admissible point `mu + R`.
pub fn calibrate_c(
    schedule: &Schedule,
    estimator: &SmomConfig,
    noise: &NoiseModel,
    pilots: usize,
    base_seed: u64,
) -> Result<Calibration> {
    if pilots == 0 {
        return Err(invalid("pilots", "must be positive"));
    }
    let unit = schedule.with_c(1.0)?;
    let a_unit = unit.bound_numerator();
    let run = SgdRun {
        schedule: unit,
        estimator: *estimator,
        mu: 0.0,
        x0: schedule.r(),
        noise: *noise,
    };
    let mut per_run = Vec::with_capacity(pilots);
    for p in 0..pilots as u64 {
        let seed = base_seed.wrapping_add(p);
        let mut needed: f64 = 0.0;
        run.run(
            schedule.horizon(),
            &mut RngStream::new(seed, 0),
            &mut RngStream::new(seed, 1),
            |k, x| {
                if k >= 1 {
                    let gap = 0.5 * x * x;
                    needed = needed.max(gap * (k as f64 + 1.0) / a_unit);
                }
            },
        )?;
        per_run.push(needed);
    }
    let mut sorted = per_run.clone();
    sorted.sort_by(f64::total_cmp);
    let allowed_failures = (schedule.delta() * pilots as f64).floor() as usize;
    let idx = pilots - 1 - allowed_failures.min(pilots - 1);
    let c = sorted[idx];
    let coverage = per_run.iter().filter(|&&v| v <= c).count() as f64 / pilots as f64;
    Ok(Calibration {
        c,
        per_run,
        coverage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sched(c: f64) -> Schedule {
        Schedule::new(100, 0.01, 1.0, 1.0, c).unwrap()
    }

    #[test]
    fn gradient_oracle_examples() {
        assert_eq!(gradient_oracle(0.0, 3.0), -3.0);
        assert_eq!(gradient_oracle(1.25, 1.25), 0.0);
        assert_eq!(gradient_oracle(2.0, -1.0), 3.0);
    }

    #[test]
    fn reference_schedule_values() {
        // ln(40400) = 10.606_5..., 1/(400 * that) = 2.357e-4 < ln(101)/101
        let s = sched(1.0);
        assert_relative_eq!(s.gamma(), 2.357_040e-4, max_relative = 1e-5);
        let l0 = OptimizerState::new(0.0, 0, s).clip_level();
        assert_relative_eq!(l0, 3.332_55, max_relative = 1e-5);
    }

    #[test]
    fn clip_level_ratio_and_decay() {
        let s = sched(1.0);
        for k in [0u64, 1, 7, 1000] {
            let ratio = s.clip_level_at(k + 2) / s.clip_level_at(k);
            assert_relative_eq!(ratio, (-s.gamma()).exp(), max_relative = 1e-12);
            assert!(s.clip_level_at(k + 1) < s.clip_level_at(k));
        }
    }

    #[test]
    fn g_bound_examples() {
        let s = sched(1.0);
        assert_relative_eq!(g_bound(9, &s), 22.590, max_relative = 1e-4);
        for k in [1u64, 4, 50] {
            assert_relative_eq!(g_bound(2 * k + 1, &s) / g_bound(k, &s), 0.5, max_relative = 1e-12);
        }
        assert_eq!(g_bound(5, &sched(0.0)), 0.0);
    }

    #[test]
    fn g_inverse_examples() {
        let s = sched(1.0);
        assert_relative_eq!(g_inverse(g_bound(9, &s), &s).unwrap(), 9.0, max_relative = 1e-12);
        assert_relative_eq!(g_inverse(s.bound_numerator(), &s).unwrap(), 0.0, epsilon = 1e-12);
        assert_relative_eq!(
            g_inverse(s.bound_numerator() / 10.0, &s).unwrap(),
            9.0,
            max_relative = 1e-12
        );
        assert!(g_inverse(0.0, &s).is_err());
        assert!(g_inverse(-1.0, &s).is_err());
    }

    #[test]
    fn sgd_step_examples() {
        // gamma and lambda injected directly to pin the arithmetic
        let s = sched(1.0);
        let st = OptimizerState::new(5.0, 0, s);
        assert_relative_eq!(sgd_step_with(&st, 5.0, 0.1, 10.0).x, 4.5, epsilon = 1e-12);
        assert_relative_eq!(sgd_step_with(&st, 50.0, 0.1, 1.0).x, 4.9, epsilon = 1e-12);
        let next = sgd_step(&st, 0.0);
        assert_eq!(next.x, 5.0);
        assert_eq!(next.k, 1);
    }

    #[test]
    fn overruns_counted_past_horizon() {
        let s = Schedule::new(2, 0.5, 1.0, 1.0, 1.0).unwrap();
        let mut st = OptimizerState::new(0.0, 0, s);
        for _ in 0..5 {
            st = sgd_step(&st, 1.0);
        }
        assert_eq!(st.k, 5);
        assert_eq!(st.overruns, 3);
        assert!(st.clip_level() > 0.0);
    }

    #[test]
    fn schedule_rejects_invalid() {
        assert!(Schedule::new(0, 0.1, 1.0, 1.0, 1.0).is_err());
        assert!(Schedule::new(10, 0.0, 1.0, 1.0, 1.0).is_err());
        assert!(Schedule::new(10, 1.5, 1.0, 1.0, 1.0).is_err());
        assert!(Schedule::new(10, 0.1, 0.0, 1.0, 1.0).is_err());
        assert!(Schedule::new(10, 0.1, 1.0, 0.0, 1.0).is_err());
        assert!(Schedule::new(10, 0.1, 1.0, 1.0, -1.0).is_err());
        // (K+1) R^2 = 11 * 0.09 < 1
        assert!(Schedule::new(10, 0.1, 0.3, 1.0, 1.0).is_err());
    }

    #[test]
    fn calibration_covers_requested_fraction() {
        let s = Schedule::new(200, 0.1, 1.0, 1.0, 1.0).unwrap();
        let est = SmomConfig::new(0, 1, 0.0).unwrap();
        let noise = NoiseModel::cauchy(1.0).unwrap();
        let cal = calibrate_c(&s, &est, &noise, 40, 3).unwrap();
        assert!(cal.coverage >= 0.9);
        assert!(cal.c > 0.0);
        let tighter = cal.per_run.iter().filter(|&&v| v < cal.c).count();
        assert!((tighter as f64) < 0.9 * 40.0 + 1.0);
    }
}
