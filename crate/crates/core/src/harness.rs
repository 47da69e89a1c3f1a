//! Trial execution and cross-trial aggregation.
//!
//! Regret is pseudo-regret indexed by raw pulls: every reward drawn, whether
//! during initialization or inside a batch, adds the gap of the pulled arm.
//! Trial `i` of an experiment uses seed `base_seed + i`; within a trial, arm
//! `a` draws its noise from stream `a + 1` and the policy's own randomness
//! comes from stream 0.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clipped_sgd::{Schedule, SgdRun};
use crate::distributions::{NoiseModel, RngStream};
use crate::environments::{delta_sweep_env, EnvSpec, SweepKind};
use crate::error::{invalid, Error, Result};
use crate::estimators::{median, SmomConfig};
use crate::policies::PolicyConfig;

/// Default cap on stored checkpoints per trace.
pub const MAX_TRACE_POINTS: usize = 2000;

const POLICY_STREAM: u64 = 0;

fn arm_stream(arm: usize) -> u64 {
    arm as u64 + 1
}

/// What a trial records beyond the regret curve.
#[derive(Clone, Debug)]
pub struct TrialOptions {
    /// Mean-regret targets `R_t / t` whose first hitting pull is tracked.
    pub targets: Vec<f64>,
    pub max_points: usize,
    /// Store per-arm pull counts at every checkpoint.
    pub record_arm_pulls: bool,
    /// Store the arm chosen at every policy step.
    pub record_selections: bool,
}

impl Default for TrialOptions {
    fn default() -> Self {
        Self {
            targets: Vec::new(),
            max_points: MAX_TRACE_POINTS,
            record_arm_pulls: false,
            record_selections: false,
        }
    }
}

impl TrialOptions {
    pub fn with_targets(targets: &[f64]) -> Self {
        Self {
            targets: targets.to_vec(),
            ..Self::default()
        }
    }
}

/// Cumulative pseudo-regret sampled at increasing raw-pull checkpoints.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegretTrace {
    pub checkpoints: Vec<u64>,
    pub cum_regret: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arm_pulls: Option<Vec<Vec<u64>>>,
    /// Raw pulls consumed by the trial.
    pub pulls: u64,
}

impl RegretTrace {
    pub fn final_regret(&self) -> f64 {
        self.cum_regret.last().copied().unwrap_or(0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TargetHit {
    pub target: f64,
    pub hit: bool,
    /// Seconds from trial start until the target was first met.
    pub time_to_hit: Option<f64>,
    pub pulls_to_hit: Option<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialSummary {
    pub policy: String,
    pub seed: u64,
    pub trace: RegretTrace,
    /// Seconds spent on policy computation and reward sampling.
    pub wall_time: f64,
    pub target_hits: Vec<TargetHit>,
    pub final_arm_pulls: Vec<u64>,
    /// `T max mu - sum of observed rewards`.
    pub realized_regret: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selections: Option<Vec<usize>>,
}

/// `max_points` (or fewer) pull indices in `1..=total`, always ending at `total`.
pub fn checkpoint_grid(total: u64, max_points: usize) -> Vec<u64> {
    let max_points = max_points.max(1) as u64;
    if total <= max_points {
        return (1..=total).collect();
    }
    let mut grid: Vec<u64> = (1..=max_points)
        .map(|i| (i * total).div_ceil(max_points))
        .collect();
    grid.dedup();
    grid
}

/// Raw pulls a policy consumes under `budget`: initialization plus every
/// full batch that still fits.
pub fn consumed_pulls(arms: usize, cfg: &PolicyConfig, budget: u64) -> Result<u64> {
    let init = (arms * cfg.p) as u64;
    let b = cfg.batch_size() as u64;
    if budget < init + b {
        return Err(Error::BudgetTooSmall {
            budget,
            required: init + b,
        });
    }
    Ok(init + (budget - init) / b * b)
}

struct Tracker<'a> {
    env: &'a EnvSpec,
    gaps: Vec<f64>,
    best: f64,
    streams: Vec<RngStream>,
    pulls: u64,
    regret: f64,
    realized: f64,
    counts: Vec<u64>,
    checkpoints: Vec<u64>,
    next_checkpoint: usize,
    cum_regret: Vec<f64>,
    arm_pulls: Option<Vec<Vec<u64>>>,
    targets: Vec<TargetHit>,
    started: Instant,
}

impl<'a> Tracker<'a> {
    fn new(env: &'a EnvSpec, seed: u64, checkpoints: Vec<u64>, opts: &TrialOptions) -> Self {
        Self {
            env,
            gaps: env.gaps(),
            best: env.best_mean(),
            streams: (0..env.arms())
                .map(|a| RngStream::new(seed, arm_stream(a)))
                .collect(),
            pulls: 0,
            regret: 0.0,
            realized: 0.0,
            counts: vec![0; env.arms()],
            cum_regret: Vec::with_capacity(checkpoints.len()),
            arm_pulls: opts.record_arm_pulls.then(Vec::new),
            checkpoints,
            next_checkpoint: 0,
            targets: opts
                .targets
                .iter()
                .map(|&target| TargetHit {
                    target,
                    hit: false,
                    time_to_hit: None,
                    pulls_to_hit: None,
                })
                .collect(),
            started: Instant::now(),
        }
    }

    fn pull(&mut self, arm: usize) -> Result<f64> {
        let reward = self.env.pull(arm, &mut self.streams[arm])?;
        self.pulls += 1;
        self.counts[arm] += 1;
        self.regret += self.gaps[arm];
        self.realized += self.best - reward;
        let rate = self.regret / self.pulls as f64;
        for t in self.targets.iter_mut().filter(|t| !t.hit) {
            if rate <= t.target {
                t.hit = true;
                t.pulls_to_hit = Some(self.pulls);
                t.time_to_hit = Some(self.started.elapsed().as_secs_f64());
            }
        }
        if self.checkpoints.get(self.next_checkpoint) == Some(&self.pulls) {
            self.cum_regret.push(self.regret);
            if let Some(ap) = self.arm_pulls.as_mut() {
                ap.push(self.counts.clone());
            }
            self.next_checkpoint += 1;
        }
        Ok(reward)
    }
}

/// Run one trial: initialization, then policy steps until the next batch
/// would exceed the raw-pull budget.
pub fn run_trial(
    env: &EnvSpec,
    cfg: &PolicyConfig,
    budget: u64,
    seed: u64,
    opts: &TrialOptions,
) -> Result<TrialSummary> {
    let total = consumed_pulls(env.arms(), cfg, budget)?;
    let b = cfg.batch_size();
    let horizon = (budget / b as u64).max(1);
    let mut tracker = Tracker::new(env, seed, checkpoint_grid(total, opts.max_points), opts);
    let mut policy_rng = RngStream::new(seed, POLICY_STREAM);
    let mut selections = opts.record_selections.then(Vec::new);

    tracker.started = Instant::now();
    let mut policy = cfg.build(
        env.arms(),
        horizon,
        &mut |arm| tracker.pull(arm),
        &mut policy_rng,
    )?;
    let mut batch = vec![0.0; b];
    while tracker.pulls + b as u64 <= budget {
        let arm = policy.select_arm();
        for r in batch.iter_mut() {
            *r = tracker.pull(arm)?;
        }
        policy.update(arm, &batch, &mut policy_rng)?;
        if let Some(s) = selections.as_mut() {
            s.push(arm);
        }
    }
    let wall_time = tracker.started.elapsed().as_secs_f64();
    debug_assert_eq!(tracker.pulls, total);

    let realized_regret = tracker.realized;
    Ok(TrialSummary {
        policy: cfg.name.clone(),
        seed,
        trace: RegretTrace {
            checkpoints: tracker.checkpoints,
            cum_regret: tracker.cum_regret,
            arm_pulls: tracker.arm_pulls,
            pulls: tracker.pulls,
        },
        wall_time,
        target_hits: tracker.targets,
        final_arm_pulls: tracker.counts,
        realized_regret,
        selections,
    })
}

/// Mean, population standard deviation and nearest-rank percentiles.
pub mod stats {
    pub fn mean(xs: &[f64]) -> f64 {
        if xs.is_empty() {
            return f64::NAN;
        }
        xs.iter().sum::<f64>() / xs.len() as f64
    }

    pub fn std(xs: &[f64]) -> f64 {
        if xs.is_empty() {
            return f64::NAN;
        }
        let m = mean(xs);
        (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
    }

    /// Nearest-rank percentile, `q` in `(0, 1]`; `None` for no data.
    pub fn percentile(xs: &[f64], q: f64) -> Option<f64> {
        if xs.is_empty() {
            return None;
        }
        let mut sorted = xs.to_vec();
        sorted.sort_by(f64::total_cmp);
        let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
        Some(sorted[rank - 1])
    }

    /// Least-squares slope of `ln y` against `ln x`.
    pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
        let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
        let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
        let (mx, my) = (mean(&lx), mean(&ly));
        let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
        let var: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
        cov / var
    }
}

/// Fail count and time-to-target for one target.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetStats {
    pub target: f64,
    pub fails: usize,
    /// 90th percentile of pulls-to-target over successful trials.
    pub p90_pulls: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetTiming {
    pub target: f64,
    /// 90th percentile of seconds-to-target over successful trials.
    pub p90_time: Option<f64>,
}

/// Wall-clock figures, kept apart from the deterministic aggregates.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyTiming {
    pub policy: String,
    pub median_wall_time: f64,
    pub p90_wall_time: f64,
    pub targets: Vec<TargetTiming>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyReport {
    pub policy: String,
    pub config: PolicyConfig,
    pub pulls: u64,
    pub checkpoints: Vec<u64>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub final_mean: f64,
    pub final_std: f64,
    pub targets: Vec<TargetStats>,
    #[serde(skip)]
    pub trials: Vec<TrialSummary>,
}

impl PolicyReport {
    fn aggregate(config: &PolicyConfig, trials: Vec<TrialSummary>, targets: &[f64]) -> Self {
        let first = &trials[0].trace;
        let checkpoints = first.checkpoints.clone();
        let n_points = checkpoints.len();
        let mut mean = Vec::with_capacity(n_points);
        let mut std = Vec::with_capacity(n_points);
        let mut column = Vec::with_capacity(trials.len());
        for j in 0..n_points {
            column.clear();
            column.extend(trials.iter().map(|t| t.trace.cum_regret[j]));
            mean.push(stats::mean(&column));
            std.push(stats::std(&column));
        }
        let target_stats = targets
            .iter()
            .enumerate()
            .map(|(i, &target)| {
                let hits: Vec<f64> = trials
                    .iter()
                    .filter_map(|t| t.target_hits[i].pulls_to_hit.map(|p| p as f64))
                    .collect();
                TargetStats {
                    target,
                    fails: trials.len() - hits.len(),
                    p90_pulls: stats::percentile(&hits, 0.9),
                }
            })
            .collect();
        Self {
            policy: config.name.clone(),
            config: config.clone(),
            pulls: first.pulls,
            final_mean: mean.last().copied().unwrap_or(0.0),
            final_std: std.last().copied().unwrap_or(0.0),
            checkpoints,
            mean,
            std,
            targets: target_stats,
            trials,
        }
    }

    pub fn fails(&self, target: f64) -> Option<usize> {
        self.targets
            .iter()
            .find(|t| t.target == target)
            .map(|t| t.fails)
    }

    pub fn timing(&self) -> PolicyTiming {
        let walls: Vec<f64> = self.trials.iter().map(|t| t.wall_time).collect();
        let targets = self
            .targets
            .iter()
            .enumerate()
            .map(|(i, ts)| {
                let times: Vec<f64> = self
                    .trials
                    .iter()
                    .filter_map(|t| t.target_hits[i].time_to_hit)
                    .collect();
                TargetTiming {
                    target: ts.target,
                    p90_time: stats::percentile(&times, 0.9),
                }
            })
            .collect();
        PolicyTiming {
            policy: self.policy.clone(),
            median_wall_time: median(&walls),
            p90_wall_time: stats::percentile(&walls, 0.9).unwrap_or(f64::NAN),
            targets,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentReport {
    pub env: EnvSpec,
    pub budget: u64,
    pub trials: usize,
    pub base_seed: u64,
    pub seeds: Vec<u64>,
    pub targets: Vec<f64>,
    pub policies: Vec<PolicyReport>,
}

impl ExperimentReport {
    pub fn policy(&self, name: &str) -> Option<&PolicyReport> {
        self.policies.iter().find(|p| p.policy == name)
    }

    pub fn timings(&self) -> Vec<PolicyTiming> {
        self.policies.iter().map(PolicyReport::timing).collect()
    }
}

/// Experiment-wide settings.
#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub trials: usize,
    pub budget: u64,
    pub base_seed: u64,
    pub targets: Vec<f64>,
    pub workers: usize,
    pub max_points: usize,
}

impl ExperimentSpec {
    pub fn new(trials: usize, budget: u64, base_seed: u64) -> Self {
        Self {
            trials,
            budget,
            base_seed,
            targets: Vec::new(),
            workers: default_workers(),
            max_points: MAX_TRACE_POINTS,
        }
    }

    pub fn with_targets(mut self, targets: &[f64]) -> Self {
        self.targets = targets.to_vec();
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| invalid("workers", e.to_string()))
}

fn run_trials(
    env: &EnvSpec,
    cfg: &PolicyConfig,
    spec: &ExperimentSpec,
    pool: &rayon::ThreadPool,
) -> Result<Vec<TrialSummary>> {
    let opts = TrialOptions {
        targets: spec.targets.clone(),
        max_points: spec.max_points,
        ..TrialOptions::default()
    };
    pool.install(|| {
        (0..spec.trials)
            .into_par_iter()
            .map(|i| run_trial(env, cfg, spec.budget, spec.base_seed.wrapping_add(i as u64), &opts))
            .collect()
    })
}

/// Run every policy for `spec.trials` independent trials.
pub fn run_experiment(
    env: &EnvSpec,
    policies: &[PolicyConfig],
    spec: &ExperimentSpec,
) -> Result<ExperimentReport> {
    if spec.trials == 0 {
        return Err(invalid("trials", "must be positive"));
    }
    let pool = pool(spec.workers)?;
    let mut reports = Vec::with_capacity(policies.len());
    for cfg in policies {
        let trials = run_trials(env, cfg, spec, &pool)?;
        reports.push(PolicyReport::aggregate(cfg, trials, &spec.targets));
    }
    Ok(ExperimentReport {
        env: env.clone(),
        budget: spec.budget,
        trials: spec.trials,
        base_seed: spec.base_seed,
        seeds: (0..spec.trials as u64)
            .map(|i| spec.base_seed.wrapping_add(i))
            .collect(),
        targets: spec.targets.clone(),
        policies: reports,
    })
}

/// Time-to-target benchmark: trials run one at a time per worker so the
/// clocks do not compete; pass `workers = 1` for clean timings.
pub fn runtime_benchmark(
    env: &EnvSpec,
    policies: &[PolicyConfig],
    targets: &[f64],
    budget: u64,
    trials: usize,
    base_seed: u64,
    workers: usize,
) -> Result<ExperimentReport> {
    if targets.iter().any(|&t| !(t > 0.0)) {
        return Err(invalid("targets", "every target must be positive"));
    }
    let spec = ExperimentSpec::new(trials, budget, base_seed)
        .with_targets(targets)
        .with_workers(workers);
    run_experiment(env, policies, &spec)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPoint {
    pub delta: f64,
    /// Mean final regret per policy, in policy order.
    pub mean_regret: Vec<f64>,
    pub std_regret: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepReport {
    pub kind: SweepKind,
    pub noise: NoiseModel,
    pub policies: Vec<String>,
    pub trials: usize,
    pub budget: u64,
    pub base_seed: u64,
    pub points: Vec<SweepPoint>,
}

/// Final mean regret across trials for every gap on the grid.
pub fn delta_sweep(
    kind: SweepKind,
    grid: &[f64],
    noise: Option<NoiseModel>,
    policies: &[PolicyConfig],
    spec: &ExperimentSpec,
) -> Result<SweepReport> {
    if grid.is_empty() {
        return Err(invalid("grid", "must not be empty"));
    }
    let mut lean = spec.clone();
    lean.max_points = 1;
    let points = grid
        .iter()
        .map(|&delta| {
            let mut env = delta_sweep_env(kind, delta)?;
            if let Some(noise) = noise {
                env = env.with_noise(noise);
            }
            let report = run_experiment(&env, policies, &lean)?;
            Ok(SweepPoint {
                delta,
                mean_regret: report.policies.iter().map(|p| p.final_mean).collect(),
                std_regret: report.policies.iter().map(|p| p.final_std).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport {
        kind,
        noise: match noise {
            Some(n) => n,
            None => delta_sweep_env(kind, 0.0)?.noise,
        },
        policies: policies.iter().map(|p| p.name.clone()).collect(),
        trials: spec.trials,
        budget: spec.budget,
        base_seed: spec.base_seed,
        points,
    })
}

/// Settings for a standalone clipped-SGD convergence study.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSpec {
    pub horizon: u64,
    pub delta: f64,
    pub r: f64,
    pub l: f64,
    pub x0: f64,
    pub mu: f64,
    pub noise: NoiseModel,
    pub estimator: SmomConfig,
    pub seeds: usize,
    pub base_seed: u64,
    pub checkpoints: Vec<u64>,
}

impl ConvergenceSpec {
    /// `f = x^2/2`, Cauchy(1) noise on single-sample gradients, `x0 = R = 1`.
    pub fn cauchy_default(horizon: u64) -> Self {
        let mut checkpoints = Vec::new();
        let mut k = 100;
        while k <= horizon {
            checkpoints.push(k);
            k *= 10;
        }
        Self {
            horizon,
            delta: 0.01,
            r: 1.0,
            l: 1.0,
            x0: 1.0,
            mu: 0.0,
            noise: NoiseModel::cauchy(1.0).expect("unit scale"),
            estimator: SmomConfig {
                m: 0,
                n: 1,
                theta: 0.0,
            },
            seeds: 100,
            base_seed: 0,
            checkpoints,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceReport {
    pub spec: ConvergenceSpec,
    pub gamma: f64,
    pub checkpoints: Vec<u64>,
    pub median_suboptimality: Vec<f64>,
    /// Log-log slope of the median suboptimality against `k`.
    pub slope: f64,
}

pub fn sgd_convergence(spec: &ConvergenceSpec, workers: usize) -> Result<ConvergenceReport> {
    if spec.checkpoints.len() < 2 {
        return Err(invalid("checkpoints", "need at least two checkpoints"));
    }
    let schedule = Schedule::new(spec.horizon, spec.delta, spec.r, spec.l, 1.0)?;
    let run = SgdRun {
        schedule,
        estimator: spec.estimator.validated()?,
        mu: spec.mu,
        x0: spec.x0,
        noise: spec.noise,
    };
    let runs: Vec<Vec<f64>> = pool(workers)?.install(|| {
        (0..spec.seeds as u64)
            .into_par_iter()
            .map(|i| run.suboptimality_at(&spec.checkpoints, spec.base_seed.wrapping_add(i)))
            .collect::<Result<_>>()
    })?;
    let median_suboptimality: Vec<f64> = (0..spec.checkpoints.len())
        .map(|j| median(&runs.iter().map(|r| r[j]).collect::<Vec<_>>()))
        .collect();
    let ks: Vec<f64> = spec.checkpoints.iter().map(|&k| k as f64).collect();
    let slope = stats::loglog_slope(&ks, &median_suboptimality);
    Ok(ConvergenceReport {
        spec: spec.clone(),
        gamma: schedule.gamma(),
        checkpoints: spec.checkpoints.clone(),
        median_suboptimality,
        slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environments::builtin_env;
    use crate::policies::POLICY_NAMES;

    #[test]
    fn grid_covers_total() {
        assert_eq!(checkpoint_grid(5, 10), vec![1, 2, 3, 4, 5]);
        let g = checkpoint_grid(10_000, 2000);
        assert_eq!(g.len(), 2000);
        assert_eq!(*g.last().unwrap(), 10_000);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn budget_must_cover_initialization() {
        let env = builtin_env("Env1").unwrap();
        let cfg = PolicyConfig::sgd_ucb_smom();
        // 10 arms * 3 + 6 = 36
        assert!(matches!(
            run_trial(&env, &cfg, 35, 0, &TrialOptions::default()),
            Err(Error::BudgetTooSmall { required: 36, .. })
        ));
        assert!(run_trial(&env, &cfg, 36, 0, &TrialOptions::default()).is_ok());
    }

    #[test]
    fn batches_stop_before_budget() {
        let env = builtin_env("Env1").unwrap();
        let cfg = PolicyConfig::sgd_ucb_smom();
        let s = run_trial(&env, &cfg, 100, 1, &TrialOptions::default()).unwrap();
        // 30 + 11 * 6 = 96
        assert_eq!(s.trace.pulls, 96);
        assert_eq!(s.final_arm_pulls.iter().sum::<u64>(), 96);
    }

    #[test]
    fn zero_noise_two_arms_settles_on_best() {
        let env = EnvSpec::new("pair", vec![0.0, 10.0], NoiseModel::zero()).unwrap();
        for name in POLICY_NAMES {
            let cfg = PolicyConfig::named(name).unwrap();
            let opts = TrialOptions {
                record_selections: true,
                ..TrialOptions::default()
            };
            let s = run_trial(&env, &cfg, 3000, 0, &opts).unwrap();
            let sel = s.selections.unwrap();
            let tail = &sel[sel.len() / 2..];
            let bad = tail.iter().filter(|&&a| a == 0).count();
            assert!(bad * 100 <= tail.len(), "{name} {:?}", s.final_arm_pulls);
        }
    }

    #[test]
    fn trial_is_deterministic() {
        let env = builtin_env("Env2").unwrap();
        for name in POLICY_NAMES {
            let cfg = PolicyConfig::named(name).unwrap();
            let opts = TrialOptions {
                record_selections: true,
                ..TrialOptions::with_targets(&[0.1])
            };
            let a = run_trial(&env, &cfg, 500, 7, &opts).unwrap();
            let b = run_trial(&env, &cfg, 500, 7, &opts).unwrap();
            assert_eq!(a.trace, b.trace);
            assert_eq!(a.selections, b.selections);
            assert_eq!(a.final_arm_pulls, b.final_arm_pulls);
        }
    }

    #[test]
    fn single_trial_report_has_zero_spread() {
        let env = builtin_env("Env2").unwrap();
        let spec = ExperimentSpec::new(1, 300, 5);
        let r = run_experiment(&env, &[PolicyConfig::sgd_ucb()], &spec).unwrap();
        let p = &r.policies[0];
        assert_eq!(p.mean, p.trials[0].trace.cum_regret);
        assert!(p.std.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn report_is_independent_of_worker_count() {
        let env = builtin_env("Env2").unwrap();
        let policies = [PolicyConfig::sgd_ucb_median(), PolicyConfig::ucb()];
        let a = run_experiment(&env, &policies, &ExperimentSpec::new(6, 400, 3).with_workers(1)).unwrap();
        let b = run_experiment(&env, &policies, &ExperimentSpec::new(6, 400, 3).with_workers(4)).unwrap();
        for (pa, pb) in a.policies.iter().zip(&b.policies) {
            assert_eq!(pa.mean, pb.mean);
            assert_eq!(pa.std, pb.std);
        }
    }

    #[test]
    fn unreachable_target_counts_as_failure() {
        let env = builtin_env("Env1").unwrap();
        let r = runtime_benchmark(&env, &[PolicyConfig::sgd_ucb()], &[1e-9], 200, 3, 0, 1).unwrap();
        let p = &r.policies[0];
        assert_eq!(p.fails(1e-9), Some(3));
        assert_eq!(p.targets[0].p90_pulls, None);
        assert_eq!(p.timing().targets[0].p90_time, None);
    }

    #[test]
    fn trivially_met_target_hits_on_first_pull() {
        let env = EnvSpec::new("flat", vec![1.0, 1.0], NoiseModel::zero()).unwrap();
        let r = runtime_benchmark(&env, &[PolicyConfig::sgd_ucb()], &[0.5], 50, 2, 0, 1).unwrap();
        let p = &r.policies[0];
        assert_eq!(p.fails(0.5), Some(0));
        assert_eq!(p.targets[0].p90_pulls, Some(1.0));
        assert!(runtime_benchmark(&env, &[PolicyConfig::sgd_ucb()], &[0.0], 50, 2, 0, 1).is_err());
    }

    #[test]
    fn sweep_at_zero_gap_has_no_regret() {
        let spec = ExperimentSpec::new(3, 200, 0);
        let r = delta_sweep(
            SweepKind::TwoArm,
            &[0.0, 0.5],
            None,
            &[PolicyConfig::sgd_ucb(), PolicyConfig::ucb()],
            &spec,
        )
        .unwrap();
        assert_eq!(r.points[0].mean_regret, vec![0.0, 0.0]);
        assert!(r.points[1].mean_regret.iter().all(|&m| m > 0.0));
        assert!(delta_sweep(SweepKind::TwoArm, &[], None, &[PolicyConfig::ucb()], &spec).is_err());
    }

    #[test]
    fn percentile_and_slope() {
        assert_eq!(stats::percentile(&[3.0, 1.0, 2.0], 0.9), Some(3.0));
        assert_eq!(stats::percentile(&(1..=100).map(f64::from).collect::<Vec<_>>(), 0.9), Some(90.0));
        let xs = [1.0, 10.0, 100.0];
        let ys = [1.0, 0.1, 0.01];
        assert!((stats::loglog_slope(&xs, &ys) + 1.0).abs() < 1e-12);
    }
}
