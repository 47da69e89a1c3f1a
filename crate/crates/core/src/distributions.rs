//! Seedable noise laws for reward generation.
//!
//! Every law is sampled by inverse transform from a single open-interval
//! uniform (or, for the Gaussian, from the ziggurat in `rand_distr`), so a
//! given [`RngStream`] always yields the same sequence of draws.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Open01, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{invalid, Error, Result};

/// Weight of the Cauchy component in both mixture laws.
pub const DEFAULT_CAUCHY_WEIGHT: f64 = 0.7;

/// Counter-based random stream.
///
/// Backed by ChaCha8 with the 64-bit stream selector, so streams that share
/// a seed but differ in `stream_id` never overlap.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform draw on the open interval (0, 1).
    pub fn open01(&mut self) -> f64 {
        self.inner.sample(Open01)
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// The family and parameters of a noise law.
///
/// Mixtures carry the weight of their Cauchy component; the remaining mass
/// goes to the shifted exponential (`CauchyExp`) or shifted Pareto
/// (`CauchyPareto`) component, so the weights always sum to one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NoiseKind {
    Cauchy {
        #[serde(default = "one")]
        scale: f64,
    },
    Frechet {
        #[serde(default = "one")]
        shape: f64,
    },
    CauchyExp {
        #[serde(default = "default_weight")]
        cauchy_weight: f64,
    },
    CauchyPareto {
        #[serde(default = "default_weight")]
        cauchy_weight: f64,
    },
    Gaussian,
    /// Degenerate law at zero, for tests and sanity runs.
    Zero,
}

fn one() -> f64 {
    1.0
}

fn default_weight() -> f64 {
    DEFAULT_CAUCHY_WEIGHT
}

impl NoiseKind {
    pub fn name(&self) -> &'static str {
        match self {
            NoiseKind::Cauchy { .. } => "cauchy",
            NoiseKind::Frechet { .. } => "frechet",
            NoiseKind::CauchyExp { .. } => "cauchy-exp",
            NoiseKind::CauchyPareto { .. } => "cauchy-pareto",
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::Zero => "zero",
        }
    }

    pub fn is_mixture(&self) -> bool {
        matches!(
            self,
            NoiseKind::CauchyExp { .. } | NoiseKind::CauchyPareto { .. }
        )
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseKind::Cauchy { scale } => write!(f, "cauchy(scale={scale})"),
            NoiseKind::Frechet { shape } => write!(f, "frechet(shape={shape})"),
            NoiseKind::CauchyExp { cauchy_weight } => write!(f, "cauchy-exp(w={cauchy_weight})"),
            NoiseKind::CauchyPareto { cauchy_weight } => {
                write!(f, "cauchy-pareto(w={cauchy_weight})")
            }
            NoiseKind::Gaussian => write!(f, "gaussian"),
            NoiseKind::Zero => write!(f, "zero"),
        }
    }
}

/// A validated noise law plus optional tail metadata (`E|xi|^alpha <= sigma^alpha`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    #[serde(flatten)]
    kind: NoiseKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tail_alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tail_sigma: Option<f64>,
}

impl NoiseModel {
    pub fn new(kind: NoiseKind) -> Result<Self> {
        match kind {
            NoiseKind::Cauchy { scale } if !(scale > 0.0 && scale.is_finite()) => {
                return Err(invalid("scale", format!("must be positive, got {scale}")))
            }
            NoiseKind::Frechet { shape } if !(shape > 0.0 && shape.is_finite()) => {
                return Err(invalid("shape", format!("must be positive, got {shape}")))
            }
            NoiseKind::CauchyExp { cauchy_weight } | NoiseKind::CauchyPareto { cauchy_weight }
                if !(0.0..=1.0).contains(&cauchy_weight) =>
            {
                return Err(invalid(
                    "cauchy_weight",
                    format!("must lie in [0, 1], got {cauchy_weight}"),
                ))
            }
            _ => {}
        }
        Ok(Self {
            kind,
            tail_alpha: None,
            tail_sigma: None,
        })
    }

    pub fn cauchy(scale: f64) -> Result<Self> {
        Self::new(NoiseKind::Cauchy { scale })
    }

    pub fn frechet(shape: f64) -> Result<Self> {
        Self::new(NoiseKind::Frechet { shape })
    }

    pub fn cauchy_exp() -> Self {
        Self::new(NoiseKind::CauchyExp {
            cauchy_weight: DEFAULT_CAUCHY_WEIGHT,
        })
        .expect("default weight is valid")
    }

    pub fn cauchy_pareto() -> Self {
        Self::new(NoiseKind::CauchyPareto {
            cauchy_weight: DEFAULT_CAUCHY_WEIGHT,
        })
        .expect("default weight is valid")
    }

    pub fn gaussian() -> Self {
        Self::new(NoiseKind::Gaussian).expect("gaussian has no parameters")
    }

    pub fn zero() -> Self {
        Self::new(NoiseKind::Zero).expect("zero has no parameters")
    }

    /// Attach tail metadata. Both values must be positive.
    pub fn with_tail(mut self, alpha: f64, sigma: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(invalid("tail_alpha", format!("must be positive, got {alpha}")));
        }
        if !(sigma > 0.0) {
            return Err(invalid("tail_sigma", format!("must be positive, got {sigma}")));
        }
        self.tail_alpha = Some(alpha);
        self.tail_sigma = Some(sigma);
        Ok(self)
    }

    /// Re-run the constructor checks, e.g. after deserialization.
    pub fn validated(self) -> Result<Self> {
        let fresh = Self::new(self.kind)?;
        match (self.tail_alpha, self.tail_sigma) {
            (Some(a), Some(s)) => fresh.with_tail(a, s),
            (None, None) => Ok(fresh),
            _ => Err(invalid(
                "tail_alpha",
                "tail_alpha and tail_sigma must be given together",
            )),
        }
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    pub fn tail_alpha(&self) -> Option<f64> {
        self.tail_alpha
    }

    pub fn tail_sigma(&self) -> Option<f64> {
        self.tail_sigma
    }

    /// Draw one noise value.
    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match self.kind {
            NoiseKind::Cauchy { scale } => cauchy_inverse(scale, rng.open01()),
            NoiseKind::Frechet { shape } => frechet_inverse(shape, rng.open01()),
            NoiseKind::CauchyExp { cauchy_weight } => {
                if rng.open01() < cauchy_weight {
                    cauchy_inverse(1.0, rng.open01())
                } else {
                    shifted_exp_inverse(rng.open01())
                }
            }
            NoiseKind::CauchyPareto { cauchy_weight } => {
                if rng.open01() < cauchy_weight {
                    cauchy_inverse(1.0, rng.open01())
                } else {
                    shifted_pareto_from_uniform(rng.open01())
                }
            }
            NoiseKind::Gaussian => rng.standard_normal(),
            NoiseKind::Zero => 0.0,
        }
    }

    /// Exact inverse CDF. Mixtures have no closed form and are rejected.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(invalid("q", format!("must lie in (0, 1), got {q}")));
        }
        match self.kind {
            NoiseKind::Cauchy { scale } => Ok(cauchy_inverse(scale, q)),
            NoiseKind::Frechet { shape } => Ok(frechet_inverse(shape, q)),
            NoiseKind::Gaussian => Ok(standard_normal().inverse_cdf(q)),
            NoiseKind::Zero => Ok(0.0),
            kind @ (NoiseKind::CauchyExp { .. } | NoiseKind::CauchyPareto { .. }) => {
                Err(Error::NoClosedFormQuantile(kind.name().to_string()))
            }
        }
    }

    /// Cumulative distribution function, including mixtures.
    pub fn cdf(&self, x: f64) -> f64 {
        match self.kind {
            NoiseKind::Cauchy { scale } => cauchy_cdf(scale, x),
            NoiseKind::Frechet { shape } => {
                if x <= 0.0 {
                    0.0
                } else {
                    (-x.powf(-shape)).exp()
                }
            }
            NoiseKind::CauchyExp { cauchy_weight } => {
                let exp_part = if x < -1.0 { 0.0 } else { 1.0 - (-(x + 1.0)).exp() };
                cauchy_weight * cauchy_cdf(1.0, x) + (1.0 - cauchy_weight) * exp_part
            }
            NoiseKind::CauchyPareto { cauchy_weight } => {
                let pareto_part = if x < -0.5 {
                    0.0
                } else {
                    1.0 - (x + 1.5).powi(-3)
                };
                cauchy_weight * cauchy_cdf(1.0, x) + (1.0 - cauchy_weight) * pareto_part
            }
            NoiseKind::Gaussian => standard_normal().cdf(x),
            NoiseKind::Zero => {
                if x < 0.0 {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

fn cauchy_inverse(scale: f64, u: f64) -> f64 {
    scale * (PI * (u - 0.5)).tan()
}

fn cauchy_cdf(scale: f64, x: f64) -> f64 {
    0.5 + (x / scale).atan() / PI
}

fn frechet_inverse(shape: f64, u: f64) -> f64 {
    (-u.ln()).powf(-1.0 / shape)
}

// density e^{-(x+1)} on x >= -1
fn shifted_exp_inverse(u: f64) -> f64 {
    -1.0 - u.ln()
}

// density 3 / (x + 1.5)^4, which integrates to one on x >= -0.5 (zero mean);
// u is the survival probability
fn shifted_pareto_from_uniform(u: f64) -> f64 {
    u.powf(-1.0 / 3.0) - 1.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cauchy_upper_quartile_is_scale() {
        let m = NoiseModel::cauchy(1.0).unwrap();
        assert_relative_eq!(m.quantile(0.75).unwrap(), 1.0, epsilon = 1e-12);
        let m2 = NoiseModel::cauchy(2.0).unwrap();
        assert_eq!(m2.quantile(0.5).unwrap(), 0.0);
    }

    #[test]
    fn frechet_quantiles() {
        let m = NoiseModel::frechet(1.0).unwrap();
        assert_relative_eq!(m.quantile(0.5).unwrap(), 1.0 / 2f64.ln(), epsilon = 1e-12);
        let m = NoiseModel::frechet(1.25).unwrap();
        assert_relative_eq!(
            m.quantile((-1.0f64).exp()).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn gaussian_median_is_zero() {
        assert_relative_eq!(
            NoiseModel::gaussian().quantile(0.5).unwrap(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn mixture_quantile_rejected() {
        assert!(matches!(
            NoiseModel::cauchy_exp().quantile(0.5),
            Err(Error::NoClosedFormQuantile(_))
        ));
        assert!(NoiseModel::cauchy_pareto().quantile(0.5).is_err());
    }

    #[test]
    fn quantile_rejects_closed_interval() {
        let m = NoiseModel::gaussian();
        assert!(m.quantile(0.0).is_err());
        assert!(m.quantile(1.0).is_err());
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(NoiseModel::cauchy(0.0).is_err());
        assert!(NoiseModel::cauchy(-1.0).is_err());
        assert!(NoiseModel::frechet(0.0).is_err());
        assert!(NoiseModel::new(NoiseKind::CauchyExp { cauchy_weight: 1.2 }).is_err());
        assert!(NoiseModel::gaussian().with_tail(0.0, 1.0).is_err());
    }

    #[test]
    fn mixture_components_start_at_their_support_minimum() {
        assert_relative_eq!(shifted_exp_inverse(1.0), -1.0);
        assert_relative_eq!(shifted_pareto_from_uniform(1.0), -0.5);
        assert!(shifted_exp_inverse(1e-9) > 0.0);
        assert!(shifted_pareto_from_uniform(1e-9) > 0.0);
    }

    #[test]
    fn gaussian_sample_mean_near_zero() {
        let m = NoiseModel::gaussian();
        let mut rng = RngStream::new(11, 0);
        let n = 1_000_000;
        let mean = (0..n).map(|_| m.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let m = NoiseModel::cauchy(1.0).unwrap();
        let mut a = RngStream::new(5, 3);
        let mut b = RngStream::new(5, 3);
        let mut c = RngStream::new(5, 4);
        let xa: Vec<f64> = (0..10_000).map(|_| m.sample(&mut a)).collect();
        let xb: Vec<f64> = (0..10_000).map(|_| m.sample(&mut b)).collect();
        let xc: Vec<f64> = (0..10_000).map(|_| m.sample(&mut c)).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
    }
}
