//! Run configuration: a TOML file resolved into a validated [`RunConfig`].
//!
//! ```toml
//! kind = "curves"              # curves | bench | delta-sweep | sgd-convergence | calibrate-c
//! env = ["Env1", "Env2"]       # or a single name
//! noise = "cauchy"             # shorthand, or a table: { kind = "frechet", shape = 1.25 }
//! trials = 100
//! budget = 10000               # raw pulls per trial
//! seed = 0
//!
//! [[policies]]
//! name = "SGD-UCB-SMoM"
//! p = 3
//! c = 1e-3
//! ```
//!
//! `policy = "sgd-ucb-smom"` (or a list of names) is shorthand for policies
//! with library defaults. Unknown keys are rejected.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clipbandit::distributions::{NoiseKind, NoiseModel};
use clipbandit::environments::{builtin_env, delta_sweep_env, SweepKind, BUILTIN_ENVS};
use clipbandit::harness::{consumed_pulls, ConvergenceSpec};
use clipbandit::policies::{DeltaRule, PolicyConfig, PolicyFamily, POLICY_NAMES};
use clipbandit::SmomConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Curves,
    Bench,
    DeltaSweep,
    SgdConvergence,
    CalibrateC,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Curves => "curves",
            ExperimentKind::Bench => "bench",
            ExperimentKind::DeltaSweep => "delta-sweep",
            ExperimentKind::SgdConvergence => "sgd-convergence",
            ExperimentKind::CalibrateC => "calibrate-c",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
    Plotdata,
}

pub const ALL_FORMATS: [OutputFormat; 3] = [OutputFormat::Csv, OutputFormat::Json, OutputFormat::Plotdata];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSettings {
    pub kind: SweepKind,
    pub grid: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceSettings {
    pub horizon: u64,
    pub delta: f64,
    pub r: f64,
    pub l: f64,
    pub x0: f64,
    pub mu: f64,
    pub smom: SmomConfig,
    pub seeds: usize,
    pub checkpoints: Vec<u64>,
}

impl Default for ConvergenceSettings {
    fn default() -> Self {
        let d = ConvergenceSpec::cauchy_default(100_000);
        Self {
            horizon: d.horizon,
            delta: d.delta,
            r: d.r,
            l: d.l,
            x0: d.x0,
            mu: d.mu,
            smom: d.estimator,
            seeds: d.seeds,
            checkpoints: d.checkpoints,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CalibrationSettings {
    pub horizon: u64,
    pub delta: f64,
    pub r: f64,
    pub l: f64,
    pub smom: SmomConfig,
    pub pilots: usize,
}

impl Default for CalibrationSettings {
    fn default() -> Self {
        Self {
            horizon: 1000,
            delta: 0.01,
            r: 1.0,
            l: 1.0,
            smom: SmomConfig {
                m: 1,
                n: 2,
                theta: 0.0,
            },
            pilots: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutputSettings {
    /// Left out of the echoed config so outputs do not depend on location.
    #[serde(skip)]
    pub dir: PathBuf,
    pub formats: Vec<OutputFormat>,
}

/// A fully resolved and validated run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub kind: ExperimentKind,
    pub envs: Vec<String>,
    /// Overrides the environments' default noise when set.
    pub noise: Option<NoiseModel>,
    pub policies: Vec<PolicyConfig>,
    pub trials: usize,
    pub budget: u64,
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    pub targets: Vec<f64>,
    pub sweep: SweepSettings,
    pub convergence: ConvergenceSettings,
    pub calibration: CalibrationSettings,
    pub output: OutputSettings,
}

impl RunConfig {
    /// Defaults for `kind` with every built-in policy.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let sweep_kind = SweepKind::FiveArm;
        Self {
            kind,
            envs: vec!["Env1".to_string()],
            noise: None,
            policies: POLICY_NAMES
                .iter()
                .map(|n| PolicyConfig::named(n).expect("builtin policy"))
                .collect(),
            trials: 100,
            budget: 10_000,
            seed: 0,
            workers: 0,
            targets: vec![0.1, 0.05],
            sweep: SweepSettings {
                kind: sweep_kind,
                grid: sweep_kind.default_grid(),
            },
            convergence: ConvergenceSettings::default(),
            calibration: CalibrationSettings::default(),
            output: OutputSettings {
                dir: PathBuf::from("out"),
                formats: ALL_FORMATS.to_vec(),
            },
        }
    }

    /// Noise used for `env`, after the config-level override.
    pub fn env_noise(&self, env: &str) -> Result<NoiseModel> {
        match self.noise {
            Some(n) => Ok(n),
            None => Ok(builtin_env(env)?.noise),
        }
    }

    /// Noise for the standalone optimizer studies; Cauchy(1) unless overridden.
    pub fn optimizer_noise(&self) -> NoiseModel {
        self.noise
            .unwrap_or_else(|| NoiseModel::cauchy(1.0).expect("unit scale"))
    }

    /// Multiply trial counts (and seeds / pilots) by `scale`, keeping at least one.
    pub fn scaled(mut self, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(CliError::config("scale", format!("must be positive, got {scale}")));
        }
        let apply = |n: usize| ((n as f64 * scale).round() as usize).max(1);
        self.trials = apply(self.trials);
        self.convergence.seeds = apply(self.convergence.seeds);
        self.calibration.pilots = apply(self.calibration.pilots);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(CliError::config("trials", "must be a positive integer"));
        }
        if self.budget == 0 {
            return Err(CliError::config("budget", "must be a positive integer"));
        }
        if self.envs.is_empty() {
            return Err(CliError::config("env", "at least one environment is required"));
        }
        for env in &self.envs {
            if !BUILTIN_ENVS.contains(&env.as_str()) {
                return Err(CliError::config(
                    "env",
                    format!("unknown environment `{env}`; expected one of {BUILTIN_ENVS:?}"),
                ));
            }
        }
        if let Some(noise) = self.noise {
            noise
                .validated()
                .map_err(|e| CliError::config("noise", e.to_string()))?;
        }
        let uses_policies = matches!(
            self.kind,
            ExperimentKind::Curves | ExperimentKind::Bench | ExperimentKind::DeltaSweep
        );
        if uses_policies {
            self.validate_policies()?;
        }
        match self.kind {
            ExperimentKind::Curves | ExperimentKind::Bench => {
                for env in &self.envs {
                    let arms = builtin_env(env)?.arms();
                    self.check_budget(arms)?;
                }
            }
            ExperimentKind::DeltaSweep => {
                if self.sweep.grid.is_empty() {
                    return Err(CliError::config("sweep.grid", "must not be empty"));
                }
                if let Some(d) = self.sweep.grid.iter().find(|d| !(**d >= 0.0 && d.is_finite())) {
                    return Err(CliError::config(
                        "sweep.grid",
                        format!("gaps must be nonnegative, got {d}"),
                    ));
                }
                self.check_budget(delta_sweep_env(self.sweep.kind, 0.0)?.arms())?;
            }
            ExperimentKind::SgdConvergence => self.validate_convergence()?,
            ExperimentKind::CalibrateC => {
                let c = &self.calibration;
                if c.pilots == 0 {
                    return Err(CliError::config("calibration.pilots", "must be positive"));
                }
                clipbandit::Schedule::new(c.horizon, c.delta, c.r, c.l, 1.0)
                    .map_err(|e| CliError::config("calibration", e.to_string()))?;
                c.smom
                    .validated()
                    .map_err(|e| CliError::config("calibration", e.to_string()))?;
            }
        }
        if self.kind == ExperimentKind::Bench {
            if self.targets.is_empty() {
                return Err(CliError::config("targets", "at least one target is required"));
            }
            if let Some(t) = self.targets.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
                return Err(CliError::config("targets", format!("must be positive, got {t}")));
            }
        }
        if self.output.formats.is_empty() {
            return Err(CliError::config("output.formats", "at least one format is required"));
        }
        Ok(())
    }

    fn validate_policies(&self) -> Result<()> {
        if self.policies.is_empty() {
            return Err(CliError::config("policies", "at least one policy is required"));
        }
        let mut seen = BTreeSet::new();
        for (i, cfg) in self.policies.iter().enumerate() {
            if !seen.insert(cfg.name.as_str()) {
                return Err(CliError::config(
                    format!("policies[{i}].name"),
                    format!("duplicate policy name `{}`", cfg.name),
                ));
            }
            if cfg.family == PolicyFamily::GenericZoUcb {
                return Err(CliError::config(
                    format!("policies[{i}]"),
                    "zero-order UCB needs a user-supplied optimizer and cannot run from a config",
                ));
            }
            cfg.clone()
                .validated()
                .map_err(|e| CliError::config(format!("policies[{i}]"), e.to_string()))?;
        }
        Ok(())
    }

    fn check_budget(&self, arms: usize) -> Result<()> {
        for cfg in &self.policies {
            consumed_pulls(arms, cfg, self.budget).map_err(|e| {
                CliError::config("budget", format!("{} with {arms} arms: {e}", cfg.name))
            })?;
        }
        Ok(())
    }

    fn validate_convergence(&self) -> Result<()> {
        let c = &self.convergence;
        let key = "convergence";
        if c.seeds == 0 {
            return Err(CliError::config("convergence.seeds", "must be positive"));
        }
        if c.checkpoints.len() < 2 {
            return Err(CliError::config(
                "convergence.checkpoints",
                "need at least two checkpoints",
            ));
        }
        if c.checkpoints[0] == 0
            || c.checkpoints.windows(2).any(|w| w[0] >= w[1])
            || *c.checkpoints.last().unwrap() > c.horizon
        {
            return Err(CliError::config(
                "convergence.checkpoints",
                "must be strictly increasing within 1..=horizon",
            ));
        }
        clipbandit::Schedule::new(c.horizon, c.delta, c.r, c.l, 1.0)
            .map_err(|e| CliError::config(key, e.to_string()))?;
        c.smom
            .validated()
            .map_err(|e| CliError::config(key, e.to_string()))?;
        Ok(())
    }

    pub fn convergence_spec(&self) -> ConvergenceSpec {
        let c = &self.convergence;
        ConvergenceSpec {
            horizon: c.horizon,
            delta: c.delta,
            r: c.r,
            l: c.l,
            x0: c.x0,
            mu: c.mu,
            noise: self.optimizer_noise(),
            estimator: c.smom,
            seeds: c.seeds,
            base_seed: self.seed,
            checkpoints: c.checkpoints.clone(),
        }
    }

    /// True when every reward stream is Gaussian (or noiseless).
    fn light_tailed(&self) -> bool {
        let light = |n: NoiseModel| matches!(n.kind(), NoiseKind::Gaussian | NoiseKind::Zero);
        match self.noise {
            Some(n) => light(n),
            None if self.kind == ExperimentKind::DeltaSweep => {
                self.sweep.kind == SweepKind::TwoArm
            }
            None => self.envs.iter().all(|e| e.starts_with("Gauss")),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

impl OneOrMany {
    fn into_vec(self) -> Vec<String> {
        match self {
            OneOrMany::One(s) => vec![s],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    kind: Option<ExperimentKind>,
    env: Option<OneOrMany>,
    noise: Option<toml::Value>,
    policy: Option<OneOrMany>,
    policies: Option<Vec<RawPolicy>>,
    trials: Option<i64>,
    budget: Option<i64>,
    seed: Option<i64>,
    workers: Option<i64>,
    targets: Option<Vec<f64>>,
    sweep: Option<RawSweep>,
    convergence: Option<RawConvergence>,
    calibration: Option<RawCalibration>,
    output: Option<RawOutput>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolicy {
    name: String,
    /// Display name, for running one policy under several settings.
    label: Option<String>,
    p: Option<i64>,
    m: Option<i64>,
    n: Option<i64>,
    theta: Option<f64>,
    delta: Option<toml::Value>,
    r: Option<f64>,
    l: Option<f64>,
    c: Option<f64>,
    rucb_alpha: Option<f64>,
    rucb_v: Option<f64>,
    rucb_c: Option<f64>,
    ucb_v: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    kind: Option<SweepKind>,
    grid: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConvergence {
    horizon: Option<i64>,
    delta: Option<f64>,
    r: Option<f64>,
    l: Option<f64>,
    x0: Option<f64>,
    mu: Option<f64>,
    m: Option<i64>,
    n: Option<i64>,
    theta: Option<f64>,
    seeds: Option<i64>,
    checkpoints: Option<Vec<i64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCalibration {
    horizon: Option<i64>,
    delta: Option<f64>,
    r: Option<f64>,
    l: Option<f64>,
    m: Option<i64>,
    n: Option<i64>,
    theta: Option<f64>,
    pilots: Option<i64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<String>,
    formats: Option<Vec<OutputFormat>>,
}

fn positive(key: &str, v: i64) -> Result<u64> {
    if v <= 0 {
        return Err(CliError::config(key, format!("must be a positive integer, got {v}")));
    }
    Ok(v as u64)
}

fn nonnegative(key: &str, v: i64) -> Result<u64> {
    if v < 0 {
        return Err(CliError::config(key, format!("must be nonnegative, got {v}")));
    }
    Ok(v as u64)
}

/// `"cauchy"`-style shorthand or a full noise table.
pub fn parse_noise(value: &toml::Value) -> Result<NoiseModel> {
    let model = match value {
        toml::Value::String(s) => match s.as_str() {
            "cauchy" => NoiseModel::cauchy(1.0),
            "frechet" => NoiseModel::frechet(1.25),
            "frechet1" => NoiseModel::frechet(1.0),
            "cauchy-exp" => Ok(NoiseModel::cauchy_exp()),
            "cauchy-pareto" => Ok(NoiseModel::cauchy_pareto()),
            "gaussian" => Ok(NoiseModel::gaussian()),
            "zero" => Ok(NoiseModel::zero()),
            other => {
                return Err(CliError::config(
                    "noise",
                    format!(
                        "unknown noise `{other}`; expected cauchy, frechet, frechet1, \
                         cauchy-exp, cauchy-pareto, gaussian or zero"
                    ),
                ))
            }
        },
        toml::Value::Table(_) => value
            .clone()
            .try_into::<NoiseModel>()
            .map_err(|e| CliError::config("noise", e.message().to_string()))?
            .validated(),
        _ => return Err(CliError::config("noise", "expected a name or a table")),
    };
    model.map_err(|e| CliError::config("noise", e.to_string()))
}

fn parse_delta_rule(key: &str, value: &toml::Value) -> Result<DeltaRule> {
    let rule = match value {
        toml::Value::String(s) => match s.as_str() {
            "one-over-t2" => DeltaRule::OneOverT2,
            "one-over-t-tplus1" => DeltaRule::OneOverTTplus1,
            "per-round" => DeltaRule::PerRound,
            other => {
                return Err(CliError::config(
                    key,
                    format!(
                        "unknown delta rule `{other}`; expected one-over-t2, \
                         one-over-t-tplus1, per-round or a number"
                    ),
                ))
            }
        },
        toml::Value::Float(d) => DeltaRule::Fixed(*d),
        toml::Value::Integer(d) => DeltaRule::Fixed(*d as f64),
        _ => return Err(CliError::config(key, "expected a rule name or a number")),
    };
    rule.validated().map_err(|e| CliError::config(key, e.to_string()))
}

fn default_p(cfg: &PolicyConfig, light_tailed: bool) -> usize {
    match cfg.family {
        PolicyFamily::ClippedSgdUcb | PolicyFamily::GenericFoUcb => {
            if light_tailed {
                1
            } else {
                3
            }
        }
        _ => cfg.p,
    }
}

fn resolve_policy(i: usize, raw: RawPolicy, light_tailed: bool) -> Result<PolicyConfig> {
    let key = |f: &str| format!("policies[{i}].{f}");
    let mut cfg = PolicyConfig::named(&raw.name).map_err(|_| {
        CliError::config(
            key("name"),
            format!("unknown policy `{}`; expected one of {POLICY_NAMES:?}", raw.name),
        )
    })?;
    cfg.p = default_p(&cfg, light_tailed);
    if let Some(p) = raw.p {
        cfg.p = positive(&key("p"), p)? as usize;
    }
    if let Some(m) = raw.m {
        cfg.smom.m = nonnegative(&key("m"), m)? as usize;
    }
    if let Some(n) = raw.n {
        cfg.smom.n = positive(&key("n"), n)? as usize;
    }
    if let Some(theta) = raw.theta {
        cfg.smom.theta = theta;
    }
    if let Some(d) = &raw.delta {
        cfg.delta_rule = parse_delta_rule(&key("delta"), d)?;
    }
    if let Some(r) = raw.r {
        cfg.schedule.r = r;
    }
    if let Some(l) = raw.l {
        cfg.schedule.l = l;
    }
    if let Some(c) = raw.c {
        cfg.schedule.c = c;
    }
    if let Some(a) = raw.rucb_alpha {
        cfg.rucb.alpha = a;
    }
    if let Some(v) = raw.rucb_v {
        cfg.rucb.v = v;
    }
    if let Some(c) = raw.rucb_c {
        cfg.rucb.c = c;
    }
    if let Some(v) = raw.ucb_v {
        cfg.ucb_v = v;
    }
    if let Some(label) = raw.label {
        cfg.name = label;
    }
    Ok(cfg)
}

fn toml_error(source: &str, e: toml::de::Error) -> CliError {
    let key = e
        .span()
        .and_then(|span| source.get(span))
        .map(|s| s.trim().trim_matches('"').to_string())
        .filter(|s| !s.is_empty() && s.len() <= 64)
        .unwrap_or_else(|| "<root>".to_string());
    CliError::config(key, e.message().trim().to_string())
}

/// Parse and validate a config from TOML text.
pub fn parse_str(source: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(source).map_err(|e| toml_error(source, e))?;
    let mut cfg = RunConfig::defaults(raw.kind.unwrap_or(ExperimentKind::Curves));
    if let Some(env) = raw.env {
        cfg.envs = env.into_vec();
    }
    if let Some(noise) = &raw.noise {
        cfg.noise = Some(parse_noise(noise)?);
    }
    if let Some(s) = raw.sweep {
        if let Some(kind) = s.kind {
            cfg.sweep.kind = kind;
            cfg.sweep.grid = kind.default_grid();
        }
        if let Some(grid) = s.grid {
            cfg.sweep.grid = grid;
        }
    }
    let light = cfg.light_tailed();
    if raw.policy.is_some() && raw.policies.is_some() {
        return Err(CliError::config("policy", "use either `policy` or `[[policies]]`, not both"));
    }
    if let Some(names) = raw.policy {
        cfg.policies = names
            .into_vec()
            .into_iter()
            .enumerate()
            .map(|(i, name)| {
                resolve_policy(
                    i,
                    RawPolicy {
                        name,
                        label: None,
                        p: None,
                        m: None,
                        n: None,
                        theta: None,
                        delta: None,
                        r: None,
                        l: None,
                        c: None,
                        rucb_alpha: None,
                        rucb_v: None,
                        rucb_c: None,
                        ucb_v: None,
                    },
                    light,
                )
            })
            .collect::<Result<_>>()?;
    } else if let Some(policies) = raw.policies {
        cfg.policies = policies
            .into_iter()
            .enumerate()
            .map(|(i, p)| resolve_policy(i, p, light))
            .collect::<Result<_>>()?;
    } else {
        for p in cfg.policies.iter_mut() {
            p.p = default_p(p, light);
        }
    }
    if let Some(t) = raw.trials {
        cfg.trials = positive("trials", t)? as usize;
    }
    if let Some(b) = raw.budget {
        cfg.budget = positive("budget", b)?;
    }
    if let Some(s) = raw.seed {
        cfg.seed = nonnegative("seed", s)?;
    }
    if let Some(w) = raw.workers {
        cfg.workers = nonnegative("workers", w)? as usize;
    }
    if let Some(t) = raw.targets {
        cfg.targets = t;
    }
    if let Some(c) = raw.convergence {
        let s = &mut cfg.convergence;
        if let Some(h) = c.horizon {
            s.horizon = positive("convergence.horizon", h)?;
            s.checkpoints = decades(s.horizon);
        }
        s.delta = c.delta.unwrap_or(s.delta);
        s.r = c.r.unwrap_or(s.r);
        s.l = c.l.unwrap_or(s.l);
        s.x0 = c.x0.unwrap_or(s.x0);
        s.mu = c.mu.unwrap_or(s.mu);
        if let Some(m) = c.m {
            s.smom.m = nonnegative("convergence.m", m)? as usize;
        }
        if let Some(n) = c.n {
            s.smom.n = positive("convergence.n", n)? as usize;
        }
        s.smom.theta = c.theta.unwrap_or(s.smom.theta);
        if let Some(seeds) = c.seeds {
            s.seeds = positive("convergence.seeds", seeds)? as usize;
        }
        if let Some(cp) = c.checkpoints {
            s.checkpoints = cp
                .into_iter()
                .map(|k| positive("convergence.checkpoints", k))
                .collect::<Result<_>>()?;
        }
    }
    if let Some(c) = raw.calibration {
        let s = &mut cfg.calibration;
        if let Some(h) = c.horizon {
            s.horizon = positive("calibration.horizon", h)?;
        }
        s.delta = c.delta.unwrap_or(s.delta);
        s.r = c.r.unwrap_or(s.r);
        s.l = c.l.unwrap_or(s.l);
        if let Some(m) = c.m {
            s.smom.m = nonnegative("calibration.m", m)? as usize;
        }
        if let Some(n) = c.n {
            s.smom.n = positive("calibration.n", n)? as usize;
        }
        s.smom.theta = c.theta.unwrap_or(s.smom.theta);
        if let Some(p) = c.pilots {
            s.pilots = positive("calibration.pilots", p)? as usize;
        }
    }
    if let Some(o) = raw.output {
        if let Some(dir) = o.dir {
            cfg.output.dir = PathBuf::from(dir);
        }
        if let Some(f) = o.formats {
            cfg.output.formats = f;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// `10^2, 10^3, ...` up to `horizon`.
pub fn decades(horizon: u64) -> Vec<u64> {
    std::iter::successors(Some(100u64), |k| k.checked_mul(10))
        .take_while(|&k| k <= horizon)
        .collect()
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let source = std::fs::read_to_string(path).map_err(|e| {
        CliError::config("--config", format!("cannot read `{}`: {e}", path.display()))
    })?;
    parse_str(&source)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn err_key(src: &str) -> String {
        match parse_str(src) {
            Err(CliError::Config { key, .. }) => key,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse_str("env = \"Env1\"\nnoise = \"cauchy\"\npolicy = \"sgd-ucb-smom\"\n").unwrap();
        assert_eq!(cfg.kind, ExperimentKind::Curves);
        assert_eq!(cfg.envs, vec!["Env1"]);
        assert_eq!(cfg.policies.len(), 1);
        let p = &cfg.policies[0];
        assert_eq!(p.name, "SGD-UCB-SMoM");
        assert_eq!(p.p, 3);
        assert_eq!((p.smom.m, p.smom.n), (1, 2));
        assert_eq!(p.delta_rule, DeltaRule::OneOverTTplus1);
        assert_eq!(cfg.trials, 100);
        assert_eq!(cfg.budget, 10_000);
        assert_eq!(cfg.output.formats, ALL_FORMATS.to_vec());
    }

    #[test]
    fn gaussian_defaults_to_single_initial_pull() {
        let cfg = parse_str("env = \"Gauss1\"\npolicy = [\"sgd-ucb\", \"ucb\"]\n").unwrap();
        assert_eq!(cfg.policies[0].p, 1);
        let cfg = parse_str("env = \"Env2\"\nnoise = \"gaussian\"\npolicy = \"sgd-ucb\"\n").unwrap();
        assert_eq!(cfg.policies[0].p, 1);
    }

    #[test]
    fn rejects_negative_trials() {
        assert_eq!(err_key("trials = -3\n"), "trials");
        assert_eq!(err_key("trials = 0\n"), "trials");
    }

    #[test]
    fn rejects_duplicate_policies() {
        let src = "[[policies]]\nname = \"UCB\"\n[[policies]]\nname = \"ucb\"\n";
        assert_eq!(err_key(src), "policies[1].name");
        let ok = "[[policies]]\nname = \"UCB\"\n[[policies]]\nname = \"UCB\"\nlabel = \"UCB-wide\"\nucb_v = 4.0\n";
        assert_eq!(parse_str(ok).unwrap().policies[1].name, "UCB-wide");
    }

    #[test]
    fn unknown_keys_are_named() {
        assert_eq!(err_key("trails = 5\n"), "trails");
        assert_eq!(err_key("[[policies]]\nname = \"UCB\"\nbeta = 1\n"), "beta");
        assert_eq!(err_key("env = \"Env9\"\n"), "env");
        assert_eq!(err_key("policy = \"thompson\"\n"), "policies[0].name");
        assert_eq!(err_key("noise = \"levy\"\n"), "noise");
    }

    #[test]
    fn noise_tables_and_delta_rules() {
        let src = "noise = { kind = \"frechet\", shape = 1.25 }\n[[policies]]\nname = \"SGD-UCB\"\ndelta = 0.01\n";
        let cfg = parse_str(src).unwrap();
        assert_eq!(cfg.noise.unwrap(), NoiseModel::frechet(1.25).unwrap());
        assert_eq!(cfg.policies[0].delta_rule, DeltaRule::Fixed(0.01));
        assert_eq!(err_key("noise = { kind = \"frechet\", shape = -1.0 }\n"), "noise");
        // clipped-SGD needs a horizon-based delta
        assert_eq!(
            err_key("[[policies]]\nname = \"SGD-UCB\"\ndelta = \"per-round\"\n"),
            "policies[0]"
        );
    }

    #[test]
    fn budget_must_cover_initialization() {
        assert_eq!(err_key("env = \"Env3\"\nbudget = 100\npolicy = \"sgd-ucb\"\n"), "budget");
    }

    #[test]
    fn bench_needs_positive_targets() {
        assert_eq!(err_key("kind = \"bench\"\ntargets = [0.1, 0.0]\n"), "targets");
    }

    #[test]
    fn scale_keeps_at_least_one_trial() {
        let cfg = RunConfig::defaults(ExperimentKind::Curves).scaled(0.001).unwrap();
        assert_eq!(cfg.trials, 1);
        assert!(RunConfig::defaults(ExperimentKind::Curves).scaled(0.0).is_err());
    }

    #[test]
    fn decade_checkpoints() {
        assert_eq!(decades(100_000), vec![100, 1000, 10_000, 100_000]);
        assert_eq!(decades(5000), vec![100, 1000]);
    }
}
