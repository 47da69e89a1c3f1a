use crate::clipped_sgd::{batch_gradient, g_bound, sgd_step, OptimizerState, Schedule};
use crate::distributions::RngStream;
use crate::error::Result;
use crate::estimators::{median, SmomConfig};

use super::{check_update, BanditPolicy};

/// An iterative optimizer with a known bounding function `g(k, delta)`,
/// driven independently for every arm.
///
/// Each arm's auxiliary problem has the arm mean as its minimizer; the
/// policy only ever sees the iterate `x` and the step counter `k`.
pub trait BoundedOptimizer: Send {
    /// Rewards consumed by one step.
    fn batch_size(&self) -> usize;

    /// First iterate from the initialization rewards.
    fn initial_iterate(&self, rewards: &[f64]) -> f64 {
        median(rewards)
    }

    /// Next iterate after the `k`-th step (`k >= 1`) from a fresh batch.
    fn step(&self, x: f64, k: u64, rewards: &[f64], rng: &mut RngStream) -> Result<f64>;

    /// Bound on `f(x_k) - f*` holding with probability `1 - delta`.
    fn g(&self, k: u64) -> f64;
}

/// Clipped SGD on `(x - mu)^2 / 2` as a [`BoundedOptimizer`].
#[derive(Clone, Debug)]
pub struct ClippedSgdOptimizer {
    schedule: Schedule,
    estimator: SmomConfig,
}

impl ClippedSgdOptimizer {
    pub fn new(schedule: Schedule, estimator: SmomConfig) -> Self {
        Self {
            schedule,
            estimator,
        }
    }
}

impl BoundedOptimizer for ClippedSgdOptimizer {
    fn batch_size(&self) -> usize {
        self.estimator.batch_size()
    }

    fn step(&self, x: f64, k: u64, rewards: &[f64], rng: &mut RngStream) -> Result<f64> {
        let grad = batch_gradient(x, rewards, &self.estimator, rng)?;
        Ok(sgd_step(&OptimizerState::new(x, k, self.schedule), grad).x)
    }

    fn g(&self, k: u64) -> f64 {
        g_bound(k, &self.schedule)
    }
}

/// Which index template wraps the optimizer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IndexOrder {
    /// `f = (x - mu)^2 / 2`, index `x + sqrt(2 g)`.
    FirstOrder,
    /// `f = |x - mu|`, index `x + g`.
    ZeroOrder,
}

/// Zero-order index `x + g`.
pub fn zo_ucb_index(x: f64, g_value: f64) -> f64 {
    x + g_value
}

impl IndexOrder {
    pub fn index(&self, x: f64, g_value: f64) -> f64 {
        match self {
            IndexOrder::FirstOrder => x + (2.0 * g_value).sqrt(),
            IndexOrder::ZeroOrder => zo_ucb_index(x, g_value),
        }
    }
}

/// UCB policy around an arbitrary [`BoundedOptimizer`].
pub struct GenericUcb {
    name: String,
    order: IndexOrder,
    optimizer: Box<dyn BoundedOptimizer>,
    iterates: Vec<f64>,
    steps: Vec<u64>,
    indices: Vec<f64>,
}

impl GenericUcb {
    pub fn new(
        name: &str,
        order: IndexOrder,
        optimizer: Box<dyn BoundedOptimizer>,
        init: &[Vec<f64>],
        _rng: &mut RngStream,
    ) -> Result<Self> {
        let iterates: Vec<f64> = init.iter().map(|r| optimizer.initial_iterate(r)).collect();
        let steps = vec![1; init.len()];
        let indices = iterates
            .iter()
            .map(|&x| order.index(x, optimizer.g(1)))
            .collect();
        Ok(Self {
            name: name.to_string(),
            order,
            optimizer,
            iterates,
            steps,
            indices,
        })
    }

    pub fn iterates(&self) -> &[f64] {
        &self.iterates
    }
}

impl BanditPolicy for GenericUcb {
    fn name(&self) -> &str {
        &self.name
    }

    fn batch_size(&self) -> usize {
        self.optimizer.batch_size()
    }

    fn indices(&self) -> &[f64] {
        &self.indices
    }

    fn step_counts(&self) -> Vec<u64> {
        self.steps.clone()
    }

    fn update(&mut self, arm: usize, rewards: &[f64], rng: &mut RngStream) -> Result<()> {
        check_update(arm, self.iterates.len(), rewards.len(), self.batch_size())?;
        let k = self.steps[arm];
        let x = self.optimizer.step(self.iterates[arm], k, rewards, rng)?;
        self.iterates[arm] = x;
        self.steps[arm] = k + 1;
        self.indices[arm] = self.order.index(x, self.optimizer.g(k + 1));
        Ok(())
    }
}
