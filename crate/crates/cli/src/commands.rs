//! Subcommand dispatch.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use clipbandit::clipped_sgd::{calibrate_c, Schedule};
use clipbandit::environments::builtin_env;
use clipbandit::harness::{
    default_workers, delta_sweep, run_experiment, runtime_benchmark, sgd_convergence,
    ExperimentSpec,
};

use crate::config::{parse_config, ExperimentKind, OutputFormat, RunConfig};
use crate::emit::Emitter;
use crate::error::{CliError, Result};
use crate::presets::{preset, PRESETS};

#[derive(Debug, Parser)]
#[command(name = "clipbandit", version, about = "Heavy-tailed bandit experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run whatever experiment the config or preset describes.
    Run(RunArgs),
    /// Time-to-target runtime table.
    Bench(RunArgs),
    /// Final regret over a grid of arm gaps.
    Sweep(RunArgs),
    /// Standalone clipped-SGD convergence on a quadratic.
    SgdConvergence(RunArgs),
    /// Fit the bound constant C from pilot runs.
    CalibrateC(RunArgs),
    /// Run a named preset.
    Preset {
        name: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// List the available presets.
    PresetList,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML run config.
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Named preset; see `preset-list`.
    #[arg(long)]
    pub preset: Option<String>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// Multiply trial (and seed / pilot) counts.
    #[arg(long)]
    pub scale: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Output formats; repeat or comma-separate.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub format: Vec<OutputFormat>,
}

impl Overrides {
    pub fn apply(&self, mut cfg: RunConfig) -> Result<RunConfig> {
        if let Some(scale) = self.scale {
            cfg = cfg.scaled(scale)?;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        if let Some(dir) = &self.out_dir {
            cfg.output.dir = dir.clone();
        }
        if !self.format.is_empty() {
            let mut f = self.format.clone();
            f.sort();
            f.dedup();
            cfg.output.formats = f;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Resolve a config for `kind` (`None` keeps the source's own kind).
fn resolve(args: &RunArgs, kind: Option<ExperimentKind>) -> Result<RunConfig> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), None) => {
            let mut cfg = parse_config(path)?;
            if let Some(kind) = kind {
                cfg.kind = kind;
            }
            cfg
        }
        (None, Some(name)) => {
            let cfg = preset(name)?;
            if let Some(kind) = kind.filter(|k| *k != cfg.kind) {
                return Err(CliError::Usage(format!(
                    "preset `{name}` is a {} experiment, not {}",
                    cfg.kind.name(),
                    kind.name()
                )));
            }
            cfg
        }
        _ => {
            let kind = kind.ok_or_else(|| {
                CliError::Usage("`run` needs --config or --preset".to_string())
            })?;
            RunConfig::defaults(kind)
        }
    };
    cfg = args.overrides.apply(cfg)?;
    Ok(cfg)
}

/// Parse-free entry point: resolve, run and write outputs. Returns summary lines.
pub fn execute(cli: &Cli) -> Result<Vec<String>> {
    let cfg = match &cli.command {
        Command::PresetList => {
            return Ok(PRESETS
                .iter()
                .map(|(name, desc)| format!("{name:<24}{desc}"))
                .collect())
        }
        Command::Run(a) => resolve(a, None)?,
        Command::Bench(a) => resolve(a, Some(ExperimentKind::Bench))?,
        Command::Sweep(a) => resolve(a, Some(ExperimentKind::DeltaSweep))?,
        Command::SgdConvergence(a) => resolve(a, Some(ExperimentKind::SgdConvergence))?,
        Command::CalibrateC(a) => resolve(a, Some(ExperimentKind::CalibrateC))?,
        Command::Preset { name, overrides } => overrides.apply(preset(name)?)?,
    };
    run_config(&cfg)
}

fn workers(cfg: &RunConfig) -> usize {
    if cfg.workers == 0 {
        default_workers()
    } else {
        cfg.workers
    }
}

/// Execute a validated config and write every requested output.
pub fn run_config(cfg: &RunConfig) -> Result<Vec<String>> {
    let mut out = Emitter::new(cfg)?;
    out.config(cfg)?;
    let mut lines = Vec::new();
    let spec = ExperimentSpec::new(cfg.trials, cfg.budget, cfg.seed)
        .with_targets(&cfg.targets)
        .with_workers(workers(cfg));
    match cfg.kind {
        ExperimentKind::Curves | ExperimentKind::Bench => {
            for name in &cfg.envs {
                let mut env = builtin_env(name)?;
                if let Some(noise) = cfg.noise {
                    env = env.with_noise(noise);
                }
                if cfg.kind == ExperimentKind::Bench {
                    let report = runtime_benchmark(
                        &env,
                        &cfg.policies,
                        &cfg.targets,
                        cfg.budget,
                        cfg.trials,
                        cfg.seed,
                        workers(cfg),
                    )?;
                    for p in &report.policies {
                        let fails: Vec<String> = p
                            .targets
                            .iter()
                            .map(|t| format!("{}: {} fails", t.target, t.fails))
                            .collect();
                        lines.push(format!("{name} {} {}", p.policy, fails.join(", ")));
                    }
                    out.bench(name, &report)?;
                } else {
                    let report = run_experiment(&env, &cfg.policies, &spec)?;
                    for p in &report.policies {
                        lines.push(format!(
                            "{name} {} final regret {:.3} +- {:.3}",
                            p.policy, p.final_mean, p.final_std
                        ));
                    }
                    out.experiment(name, &report)?;
                }
            }
        }
        ExperimentKind::DeltaSweep => {
            let report = delta_sweep(
                cfg.sweep.kind,
                &cfg.sweep.grid,
                cfg.noise,
                &cfg.policies,
                &spec,
            )?;
            lines.push(format!(
                "{} gaps x {} policies",
                report.points.len(),
                report.policies.len()
            ));
            out.sweep(&report)?;
        }
        ExperimentKind::SgdConvergence => {
            let report = sgd_convergence(&cfg.convergence_spec(), workers(cfg))?;
            lines.push(format!("log-log slope {:.3}", report.slope));
            out.convergence(&report)?;
        }
        ExperimentKind::CalibrateC => {
            let c = &cfg.calibration;
            let schedule = Schedule::new(c.horizon, c.delta, c.r, c.l, 1.0)?;
            let cal = calibrate_c(&schedule, &c.smom, &cfg.optimizer_noise(), c.pilots, cfg.seed)?;
            lines.push(format!("C = {} (coverage {:.3})", cal.c, cal.coverage));
            out.calibration(&cal)?;
        }
    }
    lines.extend(out.written.iter().map(|p| format!("wrote {}", p.display())));
    Ok(lines)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("clipbandit").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn preset_list_names_every_preset() {
        let lines = execute(&parse(&["preset-list"])).unwrap();
        assert_eq!(lines.len(), PRESETS.len());
        assert!(lines[1].starts_with("table1"));
    }

    #[test]
    fn overrides_apply_after_preset() {
        let o = Overrides {
            scale: Some(0.01),
            seed: Some(42),
            workers: Some(2),
            out_dir: Some("x".into()),
            format: vec![OutputFormat::Json, OutputFormat::Csv, OutputFormat::Json],
        };
        let cfg = o.apply(preset("table1").unwrap()).unwrap();
        assert_eq!((cfg.trials, cfg.seed, cfg.workers), (1, 42, 2));
        assert_eq!(cfg.output.formats, vec![OutputFormat::Csv, OutputFormat::Json]);
    }

    #[test]
    fn kind_mismatch_with_preset_is_usage_error() {
        let err = execute(&parse(&["sweep", "--preset", "table1"])).unwrap_err();
        assert_eq!(err.kind(), "usage");
        let err = execute(&parse(&["run"])).unwrap_err();
        assert_eq!(err.kind(), "usage");
    }

    #[test]
    fn bad_scale_is_config_error() {
        let err = execute(&parse(&["preset", "table1", "--scale=-1"])).unwrap_err();
        assert_eq!(err.kind(), "config");
    }
}
