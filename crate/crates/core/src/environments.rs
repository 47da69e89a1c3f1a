//! Arm layouts and reward generation `mu_i + xi`.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distributions::{NoiseModel, RngStream};
use crate::error::{invalid, Error, Result};

/// Names of the built-in mean layouts.
pub const BUILTIN_ENVS: [&str; 6] = ["Env1", "Env2", "Env3", "Gauss1", "Gauss2", "Gauss3"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvSpec {
    pub name: String,
    pub means: Vec<f64>,
    pub noise: NoiseModel,
}

impl EnvSpec {
    pub fn new(name: impl Into<String>, means: Vec<f64>, noise: NoiseModel) -> Result<Self> {
        if means.len() < 2 {
            return Err(invalid("means", "at least two arms are required"));
        }
        if means.iter().any(|m| !m.is_finite()) {
            return Err(invalid("means", "all means must be finite"));
        }
        Ok(Self {
            name: name.into(),
            means,
            noise,
        })
    }

    pub fn arms(&self) -> usize {
        self.means.len()
    }

    pub fn best_mean(&self) -> f64 {
        self.means.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `Delta_i = max_j mu_j - mu_i`.
    pub fn gaps(&self) -> Vec<f64> {
        let best = self.best_mean();
        self.means.iter().map(|m| best - m).collect()
    }

    pub fn with_noise(mut self, noise: NoiseModel) -> Self {
        self.noise = noise;
        self
    }

    /// Same layout with every mean moved by `c`.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            name: format!("{}+{c}", self.name),
            means: self.means.iter().map(|m| m + c).collect(),
            noise: self.noise,
        }
    }

    pub fn pull(&self, arm: usize, rng: &mut RngStream) -> Result<f64> {
        let mu = self
            .means
            .get(arm)
            .ok_or(Error::ArmOutOfRange {
                arm,
                arms: self.arms(),
            })?;
        Ok(mu + self.noise.sample(rng))
    }
}

/// Default noise for a builtin layout: Cauchy(1) for `Env*`, N(0,1) for `Gauss*`.
pub fn default_noise(name: &str) -> NoiseModel {
    if name.starts_with("Gauss") {
        NoiseModel::gaussian()
    } else {
        NoiseModel::cauchy(1.0).expect("unit scale")
    }
}

fn layout(arms: usize, denom: f64) -> Vec<f64> {
    (0..arms).map(|i| i as f64 / denom).collect()
}

/// Look up a built-in layout, attaching its default noise.
pub fn builtin_env(name: &str) -> Result<EnvSpec> {
    let means = match name {
        "Env1" => layout(10, 1.0),
        "Env2" => layout(10, 10.0),
        "Env3" => layout(100, 50.0),
        "Gauss1" => layout(10, 10.0),
        "Gauss2" => layout(10, 50.0),
        "Gauss3" => layout(100, 50.0),
        other => {
            return Err(Error::Unknown {
                what: "environment",
                name: other.to_string(),
            })
        }
    };
    EnvSpec::new(name, means, default_noise(name))
}

/// Layouts with a single distinguishable arm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    /// Means `{0, Delta}` under standard Gaussian noise.
    TwoArm,
    /// Means `{0, 0, 0, 0, Delta}` under Cauchy(1) noise.
    FiveArm,
}

impl SweepKind {
    pub fn name(&self) -> &'static str {
        match self {
            SweepKind::TwoArm => "two-arm",
            SweepKind::FiveArm => "five-arm",
        }
    }

    /// Default grid: 26 points, step 0.04 up to 1 (two arms) or step 0.4 up to 10 (five arms).
    pub fn default_grid(&self) -> Vec<f64> {
        let step = match self {
            SweepKind::TwoArm => 0.04,
            SweepKind::FiveArm => 0.4,
        };
        (0..26).map(|i| i as f64 * step).collect()
    }
}

impl FromStr for SweepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-arm" | "TwoArm" => Ok(SweepKind::TwoArm),
            "five-arm" | "FiveArm" => Ok(SweepKind::FiveArm),
            other => Err(Error::Unknown {
                what: "sweep kind",
                name: other.to_string(),
            }),
        }
    }
}

pub fn delta_sweep_env(kind: SweepKind, delta: f64) -> Result<EnvSpec> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(invalid("delta", format!("must be nonnegative, got {delta}")));
    }
    let (means, noise) = match kind {
        SweepKind::TwoArm => (vec![0.0, delta], NoiseModel::gaussian()),
        SweepKind::FiveArm => (
            vec![0.0, 0.0, 0.0, 0.0, delta],
            NoiseModel::cauchy(1.0).expect("unit scale"),
        ),
    };
    EnvSpec::new(format!("{}(delta={delta})", kind.name()), means, noise)
}
