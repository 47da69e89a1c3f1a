//! Report serialization. Every writer is a pure function of its report, so
//! identical reports give identical bytes; wall-clock figures go to a
//! separate timing file.

use std::fs;
use std::path::{Path, PathBuf};

use clipbandit::clipped_sgd::Calibration;
use clipbandit::harness::{ConvergenceReport, ExperimentReport, PolicyTiming, SweepReport};
use serde::Serialize;

use crate::config::{OutputFormat, RunConfig};
use crate::error::{CliError, Result};

pub const CURVES_HEADER: [&str; 5] = ["policy", "trial", "pull", "cum_regret", "mean_regret"];

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    s
}

/// Per-trial cumulative regret at every stored checkpoint.
pub fn curves_csv(report: &ExperimentReport) -> String {
    let rows = report.policies.iter().flat_map(|p| {
        p.trials.iter().enumerate().flat_map(move |(i, t)| {
            t.trace
                .checkpoints
                .iter()
                .zip(&t.trace.cum_regret)
                .map(move |(&pull, &r)| {
                    vec![
                        p.policy.clone(),
                        i.to_string(),
                        pull.to_string(),
                        num(r),
                        num(r / pull as f64),
                    ]
                })
        })
    });
    csv_string(&CURVES_HEADER, rows)
}

/// Mean curve with a one-standard-deviation band, per policy.
pub fn plot_csv(report: &ExperimentReport) -> String {
    let rows = report.policies.iter().flat_map(|p| {
        p.checkpoints
            .iter()
            .zip(p.mean.iter().zip(&p.std))
            .map(move |(&pull, (&m, &s))| {
                vec![p.policy.clone(), pull.to_string(), num(m), num(m - s), num(m + s)]
            })
    });
    csv_string(&["policy", "pull", "mean", "lower", "upper"], rows)
}

pub fn report_json(report: &ExperimentReport) -> String {
    json(report)
}

/// Parse a JSON report back through the report schema.
pub fn validate_report_json(text: &str) -> Result<ExperimentReport> {
    serde_json::from_str(text).map_err(|e| CliError::config("report", e.to_string()))
}

/// Fail counts and 90th-percentile pulls-to-target.
pub fn bench_csv(report: &ExperimentReport) -> String {
    let rows = report.policies.iter().flat_map(|p| {
        p.targets.iter().map(move |t| {
            vec![
                p.policy.clone(),
                num(t.target),
                report.trials.to_string(),
                t.fails.to_string(),
                opt(t.p90_pulls),
            ]
        })
    });
    csv_string(&["policy", "target", "trials", "fails", "p90_pulls"], rows)
}

pub fn timing_json(timings: &[PolicyTiming]) -> String {
    json(&timings)
}

pub fn sweep_csv(report: &SweepReport) -> String {
    let rows = report.points.iter().flat_map(|pt| {
        report.policies.iter().enumerate().map(move |(i, name)| {
            vec![
                name.clone(),
                num(pt.delta),
                num(pt.mean_regret[i]),
                num(pt.std_regret[i]),
            ]
        })
    });
    csv_string(&["policy", "delta", "mean_regret", "std_regret"], rows)
}

pub fn sweep_plot_csv(report: &SweepReport) -> String {
    let rows = report.policies.iter().enumerate().flat_map(|(i, name)| {
        report.points.iter().map(move |pt| {
            let (m, s) = (pt.mean_regret[i], pt.std_regret[i]);
            vec![name.clone(), num(pt.delta), num(m), num(m - s), num(m + s)]
        })
    });
    csv_string(&["policy", "delta", "mean", "lower", "upper"], rows)
}

pub fn convergence_csv(report: &ConvergenceReport) -> String {
    let rows = report
        .checkpoints
        .iter()
        .zip(&report.median_suboptimality)
        .map(|(&k, &v)| vec![k.to_string(), num(v)]);
    csv_string(&["k", "median_suboptimality"], rows)
}

/// Collects files under one output directory.
pub struct Emitter {
    dir: PathBuf,
    formats: Vec<OutputFormat>,
    pub written: Vec<PathBuf>,
}

impl Emitter {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        let dir = cfg.output.dir.clone();
        fs::create_dir_all(&dir).map_err(|source| CliError::Io {
            path: dir.clone(),
            source,
        })?;
        Ok(Self {
            dir,
            formats: cfg.output.formats.clone(),
            written: Vec::new(),
        })
    }

    pub fn wants(&self, format: OutputFormat) -> bool {
        self.formats.contains(&format)
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        write_file(&path, contents)?;
        self.written.push(path);
        Ok(())
    }

    pub fn config(&mut self, cfg: &RunConfig) -> Result<()> {
        if self.wants(OutputFormat::Json) {
            self.write("config.json", &json(cfg))?;
        }
        Ok(())
    }

    pub fn experiment(&mut self, prefix: &str, report: &ExperimentReport) -> Result<()> {
        if self.wants(OutputFormat::Csv) {
            self.write(&format!("{prefix}_curves.csv"), &curves_csv(report))?;
        }
        if self.wants(OutputFormat::Json) {
            self.write(&format!("{prefix}_report.json"), &report_json(report))?;
        }
        if self.wants(OutputFormat::Plotdata) {
            self.write(&format!("{prefix}_plot.csv"), &plot_csv(report))?;
        }
        Ok(())
    }

    /// Runtime table: deterministic counts plus a separate wall-clock file.
    pub fn bench(&mut self, prefix: &str, report: &ExperimentReport) -> Result<()> {
        self.experiment(prefix, report)?;
        if self.wants(OutputFormat::Csv) {
            self.write(&format!("{prefix}_bench.csv"), &bench_csv(report))?;
        }
        if self.wants(OutputFormat::Json) {
            self.write(&format!("{prefix}_timing.json"), &timing_json(&report.timings()))?;
        }
        Ok(())
    }

    pub fn sweep(&mut self, report: &SweepReport) -> Result<()> {
        if self.wants(OutputFormat::Csv) {
            self.write("sweep.csv", &sweep_csv(report))?;
        }
        if self.wants(OutputFormat::Json) {
            self.write("sweep.json", &json(report))?;
        }
        if self.wants(OutputFormat::Plotdata) {
            self.write("sweep_plot.csv", &sweep_plot_csv(report))?;
        }
        Ok(())
    }

    pub fn convergence(&mut self, report: &ConvergenceReport) -> Result<()> {
        if self.wants(OutputFormat::Csv) || self.wants(OutputFormat::Plotdata) {
            self.write("convergence.csv", &convergence_csv(report))?;
        }
        if self.wants(OutputFormat::Json) {
            self.write("convergence.json", &json(report))?;
        }
        Ok(())
    }

    pub fn calibration(&mut self, calibration: &Calibration) -> Result<()> {
        if self.wants(OutputFormat::Csv) {
            let rows = calibration
                .per_run
                .iter()
                .enumerate()
                .map(|(i, c)| vec![i.to_string(), num(*c)]);
            self.write("calibration.csv", &csv_string(&["pilot", "c_needed"], rows))?;
        }
        if self.wants(OutputFormat::Json) {
            self.write("calibration.json", &json(calibration))?;
        }
        Ok(())
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}
