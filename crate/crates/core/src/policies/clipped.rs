use crate::clipped_sgd::{batch_gradient, g_bound, sgd_step, OptimizerState};
use crate::distributions::RngStream;
use crate::error::Result;
use crate::estimators::{median, SmomConfig};

use super::{check_update, BanditPolicy, PolicyConfig};

/// Per-arm optimizer state and cached index.
#[derive(Clone, Debug, PartialEq)]
pub struct ArmState {
    pub optimizer: OptimizerState,
    /// `n_i`: optimizer steps, counting initialization as the first.
    pub pulls: u64,
    /// Raw rewards drawn for this arm, `p + (pulls - 1) b`.
    pub total_samples: u64,
    pub ucb: f64,
}

/// First-order index `x + sqrt(2 g(n_i))`.
pub fn fo_ucb_index(arm: &ArmState) -> f64 {
    arm.optimizer.x + (2.0 * g_bound(arm.pulls, &arm.optimizer.schedule)).sqrt()
}

/// Clipped-SGD UCB: one clipped step per round on the played arm, fed by a
/// smoothed median of means over `(2m+1) n` fresh rewards.
#[derive(Clone, Debug)]
pub struct ClippedSgdUcb {
    name: String,
    estimator: SmomConfig,
    arms: Vec<ArmState>,
    indices: Vec<f64>,
}

impl ClippedSgdUcb {
    /// Start every arm at the median of its initialization rewards with `n_i = 1`.
    pub fn new(cfg: &PolicyConfig, horizon: u64, init: &[Vec<f64>]) -> Result<Self> {
        let delta = cfg.delta_rule.resolve(horizon, 0);
        let schedule = cfg.schedule.schedule(horizon, delta)?;
        let arms: Vec<ArmState> = init
            .iter()
            .map(|rewards| {
                let mut arm = ArmState {
                    optimizer: OptimizerState::new(median(rewards), 1, schedule),
                    pulls: 1,
                    total_samples: rewards.len() as u64,
                    ucb: 0.0,
                };
                arm.ucb = fo_ucb_index(&arm);
                arm
            })
            .collect();
        let indices = arms.iter().map(|a| a.ucb).collect();
        Ok(Self {
            name: cfg.name.clone(),
            estimator: cfg.smom,
            arms,
            indices,
        })
    }

    pub fn arm_states(&self) -> &[ArmState] {
        &self.arms
    }

    pub fn overruns(&self) -> u64 {
        self.arms.iter().map(|a| a.optimizer.overruns).sum()
    }
}

impl BanditPolicy for ClippedSgdUcb {
    fn name(&self) -> &str {
        &self.name
    }

    fn batch_size(&self) -> usize {
        self.estimator.batch_size()
    }

    fn indices(&self) -> &[f64] {
        &self.indices
    }

    fn step_counts(&self) -> Vec<u64> {
        self.arms.iter().map(|a| a.pulls).collect()
    }

    fn update(&mut self, arm: usize, rewards: &[f64], rng: &mut RngStream) -> Result<()> {
        check_update(arm, self.arms.len(), rewards.len(), self.batch_size())?;
        let state = &mut self.arms[arm];
        let grad = batch_gradient(state.optimizer.x, rewards, &self.estimator, rng)?;
        state.optimizer = sgd_step(&state.optimizer, grad);
        state.pulls += 1;
        state.total_samples += rewards.len() as u64;
        state.ucb = fo_ucb_index(state);
        self.indices[arm] = state.ucb;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clipped_sgd::Schedule;
    use crate::policies::ScheduleParams;
    use approx::assert_relative_eq;

    fn arm(x: f64, pulls: u64, c: f64) -> ArmState {
        let s = Schedule::new(100, 0.01, 1.0, 1.0, c).unwrap();
        ArmState {
            optimizer: OptimizerState::new(x, pulls, s),
            pulls,
            total_samples: 0,
            ucb: 0.0,
        }
    }

    #[test]
    fn fo_index_examples() {
        // A = C * 10.6065 * 4.61512^2 = 225.90 C; C chosen so that g(1) = 2
        let a_unit = Schedule::new(100, 0.01, 1.0, 1.0, 1.0).unwrap().bound_numerator();
        assert_relative_eq!(fo_ucb_index(&arm(0.0, 1, 4.0 / a_unit)), 2.0, max_relative = 1e-12);
        assert_eq!(fo_ucb_index(&arm(1.5, 1, 0.0)), 1.5);
        assert_relative_eq!(fo_ucb_index(&arm(0.0, 9, 1.0)), 6.7216, max_relative = 1e-4);
    }

    #[test]
    fn fo_index_decreases_with_pulls() {
        let mut prev = f64::INFINITY;
        for n in 1..50 {
            let v = fo_ucb_index(&arm(0.3, n, 1.0));
            assert!(v < prev);
            prev = v;
        }
    }

    fn policy(p_rewards: &[Vec<f64>], smom: (usize, usize)) -> ClippedSgdUcb {
        let mut cfg = PolicyConfig::sgd_ucb_median();
        cfg.smom = SmomConfig::new(smom.0, smom.1, 0.0).unwrap();
        cfg.p = p_rewards[0].len();
        ClippedSgdUcb::new(&cfg, 1000, p_rewards).unwrap()
    }

    #[test]
    fn init_uses_median() {
        let p = policy(&[vec![-100.0, 0.2, 7.0], vec![1.0, 1.0, 1.0]], (1, 1));
        assert_eq!(p.arm_states()[0].optimizer.x, 0.2);
        assert_eq!(p.arm_states()[0].pulls, 1);
        assert_eq!(p.arm_states()[0].total_samples, 3);
        let single = policy(&[vec![4.2], vec![0.0]], (0, 1));
        assert_eq!(single.arm_states()[0].optimizer.x, 4.2);
    }

    #[test]
    fn update_moves_played_arm_only() {
        let mut cfg = PolicyConfig::sgd_ucb_median();
        cfg.schedule = ScheduleParams {
            r: 1000.0,
            l: 1e-3,
            c: 1.0,
        };
        let mut p = ClippedSgdUcb::new(&cfg, 1000, &[vec![5.0; 3], vec![0.0; 3]]).unwrap();
        let gamma = p.arm_states()[0].optimizer.schedule.gamma();
        let lambda = p.arm_states()[0].optimizer.clip_level();
        assert!(lambda > 4.0);
        let before = p.indices().to_vec();
        p.update(0, &[1.0, 1.0, 1.0], &mut RngStream::new(0, 0)).unwrap();
        let x = p.arm_states()[0].optimizer.x;
        assert_relative_eq!(x, 5.0 - gamma * 4.0, max_relative = 1e-12);
        assert_eq!(p.indices()[1].to_bits(), before[1].to_bits());
        assert_eq!(p.step_counts(), vec![2, 1]);
        assert_eq!(p.arm_states()[0].total_samples, 6);

        p.update(1, &[0.0, 0.0, 0.0], &mut RngStream::new(0, 0)).unwrap();
        assert_eq!(p.arm_states()[1].optimizer.x, 0.0);
    }

    #[test]
    fn update_rejects_wrong_batch() {
        let mut p = policy(&[vec![0.0; 3], vec![0.0; 3]], (1, 1));
        assert!(p.update(0, &[1.0], &mut RngStream::new(0, 0)).is_err());
        assert!(p.update(2, &[1.0; 3], &mut RngStream::new(0, 0)).is_err());
    }
}
