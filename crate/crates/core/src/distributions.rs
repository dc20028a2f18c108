//! Independent product distributions, equal-tail confidence boxes and seeded
//! sampling.
//!
//! Every draw is an inverse-CDF transform of an open-interval uniform coming
//! from a ChaCha stream, so a seed fully determines the output. Monte Carlo
//! code derives one seed per `(master, trajectory, step)` with
//! [`stream_seed`], which makes ensembles independent of evaluation order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};
use crate::interval::IntervalVector;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// One marginal of a product distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum MarginalSpec {
    Gaussian {
        mean: f64,
        std: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// Dirac mass; what a zero-variance entry of a covariance diagonal becomes.
    Point {
        value: f64,
    },
}

impl MarginalSpec {
    pub fn gaussian(mean: f64, std: f64) -> Result<Self> {
        let m = MarginalSpec::Gaussian { mean, std };
        m.validate()?;
        Ok(m)
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        let m = MarginalSpec::Uniform { lo, hi };
        m.validate()?;
        Ok(m)
    }

    /// Gaussian from a variance, collapsing to a point mass when it is zero.
    pub fn from_variance(mean: f64, variance: f64) -> Result<Self> {
        if variance == 0.0 {
            let m = MarginalSpec::Point { value: mean };
            m.validate()?;
            Ok(m)
        } else if variance > 0.0 {
            Self::gaussian(mean, variance.sqrt())
        } else {
            Err(Error::InvalidParameter(format!(
                "variance must be >= 0, got {variance}"
            )))
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            MarginalSpec::Gaussian { mean, std } => {
                if !mean.is_finite() || !(std > 0.0) || !std.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "gaussian needs finite mean and std > 0, got mean {mean}, std {std}"
                    )));
                }
            }
            MarginalSpec::Uniform { lo, hi } => {
                if !lo.is_finite() || !hi.is_finite() || !(lo < hi) {
                    return Err(Error::InvalidParameter(format!(
                        "uniform needs finite lo < hi, got [{lo}, {hi}]"
                    )));
                }
            }
            MarginalSpec::Point { value } => {
                if !value.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "point mass needs a finite value, got {value}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            MarginalSpec::Gaussian { mean, std } => 0.5 * erfc(-(x - mean) / (std * SQRT_2)),
            MarginalSpec::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            MarginalSpec::Point { value } => {
                if x < value {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    fn pdf(&self, x: f64) -> f64 {
        match *self {
            MarginalSpec::Gaussian { mean, std } => {
                let z = (x - mean) / std;
                (-0.5 * z * z).exp() / (std * (2.0 * std::f64::consts::PI).sqrt())
            }
            MarginalSpec::Uniform { lo, hi } => {
                if (lo..=hi).contains(&x) {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            MarginalSpec::Point { .. } => f64::INFINITY,
        }
    }

    /// Inverse CDF on the open interval `(0, 1)`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidProbability {
                name: "p",
                range: "(0, 1)",
                value: p,
            });
        }
        Ok(self.quantile_unchecked(p))
    }

    fn quantile_unchecked(&self, p: f64) -> f64 {
        match *self {
            MarginalSpec::Gaussian { mean, std } => {
                let mut x = mean - std * SQRT_2 * erfc_inv(2.0 * p);
                // One Newton polish on the CDF residual.
                let density = self.pdf(x);
                if density > 0.0 && density.is_finite() {
                    x -= (self.cdf(x) - p) / density;
                }
                x
            }
            MarginalSpec::Uniform { lo, hi } => lo + p * (hi - lo),
            MarginalSpec::Point { value } => value,
        }
    }

    /// Interval leaving `(1 - confidence) / 2` of the mass in each tail.
    pub fn equal_tail_interval(&self, confidence: f64) -> Result<(f64, f64)> {
        if !(confidence > 0.0 && confidence < 1.0) {
            return Err(Error::InvalidProbability {
                name: "confidence",
                range: "(0, 1)",
                value: confidence,
            });
        }
        let tail = 0.5 * (1.0 - confidence);
        Ok((
            self.quantile_unchecked(tail),
            self.quantile_unchecked(1.0 - tail),
        ))
    }

    /// Probability mass of the closed interval `[lo, hi]`.
    pub fn interval_mass(&self, lo: f64, hi: f64) -> f64 {
        match *self {
            MarginalSpec::Point { value } => {
                if lo <= value && value <= hi {
                    1.0
                } else {
                    0.0
                }
            }
            _ => (self.cdf(hi) - self.cdf(lo)).max(0.0),
        }
    }

    fn sample_from_uniform(&self, u: f64) -> f64 {
        self.quantile_unchecked(u)
    }
}

/// Mutually independent marginals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<MarginalSpec>", into = "Vec<MarginalSpec>")]
pub struct ProductDistribution {
    marginals: Vec<MarginalSpec>,
}

impl TryFrom<Vec<MarginalSpec>> for ProductDistribution {
    type Error = Error;

    fn try_from(marginals: Vec<MarginalSpec>) -> Result<Self> {
        Self::new(marginals)
    }
}

impl From<ProductDistribution> for Vec<MarginalSpec> {
    fn from(d: ProductDistribution) -> Self {
        d.marginals
    }
}

impl ProductDistribution {
    pub fn new(marginals: Vec<MarginalSpec>) -> Result<Self> {
        if marginals.is_empty() {
            return Err(Error::InvalidParameter(
                "a product distribution needs at least one marginal".into(),
            ));
        }
        for m in &marginals {
            m.validate()?;
        }
        Ok(Self { marginals })
    }

    /// Independent Gaussians given a mean and a covariance diagonal.
    pub fn gaussian_diag(mean: &[f64], variance: &[f64]) -> Result<Self> {
        if mean.len() != variance.len() {
            return Err(Error::DimensionMismatch {
                expected: mean.len(),
                found: variance.len(),
            });
        }
        let marginals = mean
            .iter()
            .zip(variance)
            .map(|(&m, &v)| MarginalSpec::from_variance(m, v))
            .collect::<Result<Vec<_>>>()?;
        Self::new(marginals)
    }

    pub fn dim(&self) -> usize {
        self.marginals.len()
    }

    pub fn marginals(&self) -> &[MarginalSpec] {
        &self.marginals
    }

    /// Box with joint mass `1 - delta`.
    ///
    /// Each of the `p` marginals gets an equal-tail interval at confidence
    /// `(1 - delta)^(1/p)`, so the product of the marginal masses is exactly
    /// `1 - delta`.
    pub fn joint_confidence_box(&self, delta: f64) -> Result<IntervalVector> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidProbability {
                name: "delta",
                range: "(0, 1)",
                value: delta,
            });
        }
        let confidence = per_component_confidence(delta, self.dim());
        let (lower, upper) = self
            .marginals
            .iter()
            .map(|m| m.equal_tail_interval(confidence))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .unzip();
        IntervalVector::new(lower, upper)
    }

    /// Product of the marginal masses of `b`.
    pub fn box_mass(&self, b: &IntervalVector) -> Result<f64> {
        crate::error::check_dim(self.dim(), b.dim())?;
        Ok(self
            .marginals
            .iter()
            .zip(b.lower().iter().zip(b.upper()))
            .map(|(m, (&lo, &hi))| m.interval_mass(lo, hi))
            .product())
    }

    /// One draw, fully determined by `seed`.
    pub fn sample(&self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.marginals
            .iter()
            .map(|m| m.sample_from_uniform(open_unit(&mut rng)))
            .collect()
    }
}

/// Per-marginal confidence that makes `p` independent marginals jointly hold
/// mass `1 - delta`.
pub fn per_component_confidence(delta: f64, p: usize) -> f64 {
    (1.0 - delta).powf(1.0 / p as f64)
}

/// Uniform on the open interval `(0, 1)` from the top 53 bits of a draw.
fn open_unit(rng: &mut impl Rng) -> f64 {
    let bits = rng.next_u64() >> 11;
    (bits as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the sub-stream used by trajectory `trajectory` at `step`.
///
/// Step `0` draws the initial state; step `k + 1` draws the disturbance
/// applied between states `k` and `k + 1`.
pub fn stream_seed(master: u64, trajectory: u64, step: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ trajectory) ^ step.rotate_left(32))
}
