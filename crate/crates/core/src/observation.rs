//! Binary (thresholded) observations of a forward model under additive
//! Gaussian noise.
//!
//! Each sensor draws `z_i = C_i(theta) + w_i`, `w_i ~ N(0, sigma^2)`, and
//! reports `b_i = 1` iff `z_i > tau`. The detection probability is
//! `q_i = F(tau - C_i(theta))` with `F` the Gaussian tail function.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{ForwardModel, SensorLocation, ThetaVector};

/// Floor applied to `q_i` and `1 - q_i` before taking logarithms.
pub const PROB_FLOOR: f64 = 1e-300;

/// Zero-mean Gaussian measurement noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    sigma: f64,
}

impl NoiseModel {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::invalid(
                "noise.sigma",
                format!("must be > 0, got {sigma}"),
            ));
        }
        Ok(Self { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Gaussian density `f(x)`.
    pub fn pdf(&self, x: f64) -> f64 {
        let t = x / self.sigma;
        (-0.5 * t * t).exp() / ((2.0 * PI).sqrt() * self.sigma)
    }

    /// Tail probability `F(x) = P(w > x)`, via `erfc` so that small tails
    /// keep full relative precision.
    pub fn tail(&self, x: f64) -> f64 {
        0.5 * libm::erfc(x * FRAC_1_SQRT_2 / self.sigma)
    }

    /// Hazard `f(x) / F(x)`, finite even when both underflow.
    pub fn hazard(&self, x: f64) -> f64 {
        let tail = self.tail(x);
        if tail > 1e-280 {
            return self.pdf(x) / tail;
        }
        // Asymptotic expansion of the inverse Mills ratio; only reached for
        // x > ~35 sigma where the truncation error is below 1e-12.
        let s2 = self.sigma * self.sigma;
        let r = s2 / (x * x);
        x / s2 / (1.0 - r + 3.0 * r * r - 15.0 * r * r * r)
    }

    /// Per-sensor information weight `f(u)^2 / (F(u) (1 - F(u)))`.
    ///
    /// Symmetric in `u`, maximal at `u = 0` where it equals
    /// `2 / (pi sigma^2)`, and always below the analog weight `1 / sigma^2`.
    /// Returns the limit value 0 once the terms underflow.
    pub fn rho(&self, u: f64) -> f64 {
        let f = self.pdf(u);
        if f == 0.0 {
            return 0.0;
        }
        let upper = self.tail(u);
        let lower = self.tail(-u);
        if upper == 0.0 || lower == 0.0 {
            return 0.0;
        }
        (f / upper) * (f / lower)
    }
}

/// Free-function form of [`NoiseModel::pdf`].
pub fn gauss_pdf(noise: &NoiseModel, x: f64) -> f64 {
    noise.pdf(x)
}

/// Free-function form of [`NoiseModel::tail`].
pub fn comp_cdf(noise: &NoiseModel, x: f64) -> f64 {
    noise.tail(x)
}

/// Free-function form of [`NoiseModel::rho`].
pub fn rho(noise: &NoiseModel, u: f64) -> f64 {
    noise.rho(u)
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Threshold(f64);

impl Threshold {
    pub fn new(tau: f64) -> Result<Self> {
        if !tau.is_finite() {
            return Err(Error::invalid("threshold.tau", "must be finite"));
        }
        Ok(Self(tau))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Vector of one-bit sensor outputs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMeasurements(Vec<bool>);

impl BinaryMeasurements {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::invalid("measurements", "need at least one sensor"));
        }
        Ok(Self(bits))
    }

    /// Build from `0`/`1` values.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let bits = bits
            .iter()
            .map(|&b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::invalid(
                    "measurements",
                    format!("bit must be 0 or 1, got {other}"),
                )),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(bits)
    }

    /// The `index`-th of the `2^len` outcomes, sensor `i` taking bit `i`.
    pub fn from_index(index: u64, len: usize) -> Self {
        Self((0..len).map(|i| (index >> i) & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }
}

/// A set of binary sensors observing one forward model.
#[derive(Debug, Clone)]
pub struct BinaryNetwork<M> {
    pub model: M,
    pub sensors: Vec<SensorLocation>,
    pub noise: NoiseModel,
    pub tau: Threshold,
}

impl<M: ForwardModel> BinaryNetwork<M> {
    pub fn new(
        model: M,
        sensors: Vec<SensorLocation>,
        noise: NoiseModel,
        tau: Threshold,
    ) -> Result<Self> {
        if sensors.is_empty() {
            return Err(Error::invalid("sensors", "need at least one sensor"));
        }
        Ok(Self {
            model,
            sensors,
            noise,
            tau,
        })
    }

    pub fn len(&self) -> usize {
        self.sensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sensors.is_empty()
    }

    fn check_len(&self, b: &BinaryMeasurements) -> Result<()> {
        if b.len() != self.sensors.len() {
            return Err(Error::DimensionMismatch {
                expected: self.sensors.len(),
                actual: b.len(),
            });
        }
        Ok(())
    }

    /// `q_i = P(b_i = 1 | theta)` for one sensor.
    pub fn detection_probability(
        &self,
        theta: &ThetaVector,
        sensor: &SensorLocation,
    ) -> Result<f64> {
        let c = self.model.concentration(theta, sensor)?;
        Ok(self.noise.tail(self.tau.value() - c))
    }

    pub fn detection_probabilities(&self, theta: &ThetaVector) -> Result<Vec<f64>> {
        self.sensors
            .iter()
            .map(|s| self.detection_probability(theta, s))
            .collect()
    }

    /// Draw one measurement vector at `theta` with a fresh seeded generator.
    pub fn simulate(&self, theta: &ThetaVector, seed: u64) -> Result<BinaryMeasurements> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.simulate_with(theta, &mut rng)
    }

    pub fn simulate_with<R: Rng + ?Sized>(
        &self,
        theta: &ThetaVector,
        rng: &mut R,
    ) -> Result<BinaryMeasurements> {
        let tau = self.tau.value();
        let bits = self
            .sensors
            .iter()
            .map(|s| {
                let c = self.model.concentration(theta, s)?;
                let w: f64 = rng.sample(StandardNormal);
                // z == tau reads as 0.
                Ok(c + self.noise.sigma() * w > tau)
            })
            .collect::<Result<Vec<_>>>()?;
        BinaryMeasurements::new(bits)
    }

    /// `sum_i b_i log q_i + (1 - b_i) log(1 - q_i)`, with both probabilities
    /// floored at [`PROB_FLOOR`].
    pub fn log_likelihood(&self, b: &BinaryMeasurements, theta: &ThetaVector) -> Result<f64> {
        self.log_likelihood_above(b, theta, f64::NEG_INFINITY)
            .map(|ll| ll.unwrap_or(f64::NEG_INFINITY))
    }

    /// Like [`log_likelihood`](Self::log_likelihood) but stops as soon as
    /// the running sum (which only decreases) drops to `floor` or below,
    /// returning `None`.
    pub fn log_likelihood_above(
        &self,
        b: &BinaryMeasurements,
        theta: &ThetaVector,
        floor: f64,
    ) -> Result<Option<f64>> {
        self.check_len(b)?;
        let tau = self.tau.value();
        let mut ll = 0.0;
        for (sensor, &bit) in self.sensors.iter().zip(b.bits()) {
            let c = self.model.concentration(theta, sensor)?;
            // 1 - F(u) == F(-u); evaluating the tail directly avoids
            // cancellation when q is close to 1.
            let p = if bit {
                self.noise.tail(tau - c)
            } else {
                self.noise.tail(c - tau)
            };
            ll += p.max(PROB_FLOOR).ln();
            if ll <= floor {
                return Ok(None);
            }
        }
        Ok(Some(ll))
    }

    /// Exact `p(b | theta)` without the log-domain floor; outcomes that are
    /// impossible to working precision get probability 0.
    pub fn probability(&self, b: &BinaryMeasurements, theta: &ThetaVector) -> Result<f64> {
        self.check_len(b)?;
        let tau = self.tau.value();
        let mut p = 1.0;
        for (sensor, &bit) in self.sensors.iter().zip(b.bits()) {
            let c = self.model.concentration(theta, sensor)?;
            p *= if bit {
                self.noise.tail(tau - c)
            } else {
                self.noise.tail(c - tau)
            };
        }
        Ok(p)
    }

    /// Gradient of the (unclamped) log-likelihood with respect to theta:
    /// `sum_i [b_i f/F - (1 - b_i) f/(1 - F)] dC_i/dtheta`, evaluated at
    /// `u_i = tau - C_i(theta)`.
    pub fn score(&self, b: &BinaryMeasurements, theta: &ThetaVector) -> Result<Vec<f64>> {
        self.check_len(b)?;
        let tau = self.tau.value();
        let mut out = vec![0.0; theta.dim()];
        for (sensor, &bit) in self.sensors.iter().zip(b.bits()) {
            let grad = self.model.gradient(theta, sensor)?;
            if grad.iter().all(|&g| g == 0.0) {
                continue;
            }
            let u = tau - self.model.concentration(theta, sensor)?;
            // f(u) / (1 - F(u)) == f(-u) / F(-u).
            let weight = if bit {
                self.noise.hazard(u)
            } else {
                -self.noise.hazard(-u)
            };
            for (o, g) in out.iter_mut().zip(&grad) {
                *o += weight * g;
            }
        }
        Ok(out)
    }
}
