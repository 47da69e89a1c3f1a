//! Named configurations for the published experiments.
//!
//! Heavy-tailed presets run the clipped-SGD policies with
//! [`ScheduleParams::tuned`] and nine initial pulls per arm; Gaussian presets
//! keep the single initial pull. Baselines use their library defaults.

use std::path::PathBuf;

use clipbandit::distributions::NoiseModel;
use clipbandit::environments::SweepKind;
use clipbandit::policies::{PolicyConfig, ScheduleParams};

use crate::config::{ExperimentKind, RunConfig, SweepSettings};
use crate::error::{CliError, Result};

/// Initial pulls per arm for the clipped-SGD policies under heavy tails.
pub const HEAVY_TAIL_P: usize = 9;

pub const PRESETS: [(&str, &str); 9] = [
    ("fig1", "Env1-Env3, Cauchy(1): regret curves, 120 trials, 10^4 pulls"),
    ("table1", "Env1, Cauchy(1): time to R_T/T in {0.1, 0.05}, 100 trials, 10^4 pulls"),
    ("heavy-frechet", "Env1-Env3, Frechet(1.25): regret curves, 120 trials, 10^4 pulls"),
    ("gauss", "Gauss1-Gauss3, N(0,1): regret curves, 150 trials, 3000 pulls"),
    ("delta-gauss", "two arms {0, D}, N(0,1), D = 0..1: 300 trials, 2000 pulls"),
    ("delta-cauchy", "five arms {0,0,0,0,D}, Cauchy(1), D = 0..10: 300 trials, 2000 pulls"),
    ("appendix-frechet1", "Env1-Env3, Frechet(1): regret curves, 120 trials, 10^4 pulls"),
    ("appendix-cauchy-exp", "Env1-Env3, Cauchy/exponential mixture: 120 trials, 10^4 pulls"),
    ("appendix-cauchy-pareto", "Env1-Env3, Cauchy/Pareto mixture: 120 trials, 10^4 pulls"),
];

/// The three clipped-SGD variants with preset hyperparameters.
pub fn sgd_policies(heavy_tailed: bool) -> Vec<PolicyConfig> {
    let p = if heavy_tailed { HEAVY_TAIL_P } else { 1 };
    [
        PolicyConfig::sgd_ucb(),
        PolicyConfig::sgd_ucb_median(),
        PolicyConfig::sgd_ucb_smom(),
    ]
    .into_iter()
    .map(|c| c.with_schedule(ScheduleParams::tuned()).with_p(p))
    .collect()
}

fn policies(heavy_tailed: bool, rucb: bool, ucb: bool) -> Vec<PolicyConfig> {
    let mut v = sgd_policies(heavy_tailed);
    if rucb {
        v.push(PolicyConfig::rucb_median());
    }
    if ucb {
        v.push(PolicyConfig::ucb());
    }
    v
}

fn envs(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn curves(name: &str, env_names: &[&str], noise: Option<NoiseModel>, trials: usize, budget: u64) -> RunConfig {
    let heavy = noise.is_some() || env_names.iter().all(|e| e.starts_with("Env"));
    let mut cfg = RunConfig::defaults(ExperimentKind::Curves);
    cfg.envs = envs(env_names);
    cfg.noise = noise;
    cfg.policies = policies(heavy, true, true);
    cfg.trials = trials;
    cfg.budget = budget;
    cfg.output.dir = PathBuf::from("out").join(name);
    cfg
}

fn sweep(name: &str, kind: SweepKind) -> RunConfig {
    let mut cfg = RunConfig::defaults(ExperimentKind::DeltaSweep);
    cfg.sweep = SweepSettings {
        kind,
        grid: kind.default_grid(),
    };
    // the heavy-tailed sweep leaves vanilla UCB out, as its regret dwarfs the rest
    cfg.policies = match kind {
        SweepKind::TwoArm => policies(false, true, true),
        SweepKind::FiveArm => policies(true, true, false),
    };
    cfg.trials = 300;
    cfg.budget = 2000;
    cfg.output.dir = PathBuf::from("out").join(name);
    cfg
}

const ENVS: [&str; 3] = ["Env1", "Env2", "Env3"];

/// Look up a preset by name.
pub fn preset(name: &str) -> Result<RunConfig> {
    let cfg = match name {
        "fig1" => curves(name, &ENVS, None, 120, 10_000),
        "table1" => {
            let mut cfg = RunConfig::defaults(ExperimentKind::Bench);
            cfg.policies = policies(true, true, false);
            cfg.targets = vec![0.1, 0.05];
            cfg.workers = 1;
            cfg.output.dir = PathBuf::from("out").join(name);
            cfg
        }
        "heavy-frechet" => curves(name, &ENVS, Some(NoiseModel::frechet(1.25)?), 120, 10_000),
        "gauss" => curves(name, &["Gauss1", "Gauss2", "Gauss3"], None, 150, 3000),
        "delta-gauss" => sweep(name, SweepKind::TwoArm),
        "delta-cauchy" => sweep(name, SweepKind::FiveArm),
        "appendix-frechet1" => curves(name, &ENVS, Some(NoiseModel::frechet(1.0)?), 120, 10_000),
        "appendix-cauchy-exp" => curves(name, &ENVS, Some(NoiseModel::cauchy_exp()), 120, 10_000),
        "appendix-cauchy-pareto" => {
            curves(name, &ENVS, Some(NoiseModel::cauchy_pareto()), 120, 10_000)
        }
        other => {
            let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
            return Err(CliError::config(
                "--preset",
                format!("unknown preset `{other}`; expected one of {names:?}"),
            ));
        }
    };
    cfg.validate()?;
    Ok(cfg)
}
