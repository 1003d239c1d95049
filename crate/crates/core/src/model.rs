//! Forward measurement models `C_i(theta)` and their analytic gradients.
//!
//! Three models are provided:
//!
//! * [`MeasurementModel::GaussianPlume`]: steady-state ground-level
//!   concentration downwind of a continuous elevated point release, with
//!   plume spreads growing linearly with downwind distance. The unknown
//!   parameters are the source coordinates `[x0, y0]`.
//! * [`MeasurementModel::Rss`]: log-distance received signal strength,
//!   `Q0 - 20 log10(r / d0)`, with unknowns `[x0, y0, Q0]`.
//! * [`MeasurementModel::Constant`]: every sensor observes the scalar
//!   parameter directly, `C_i(theta) = theta`.

use std::f64::consts::{LN_10, PI};

use crate::error::{Error, Result};

/// Default central-difference step for [`finite_difference_gradient`].
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Unknown parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaVector(Vec<f64>);

impl ThetaVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("theta", "must have at least one component"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("theta", "all components must be finite"));
        }
        Ok(Self(values))
    }

    /// Two-dimensional source position `[x0, y0]`.
    pub fn xy(x0: f64, y0: f64) -> Result<Self> {
        Self::new(vec![x0, y0])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, m: usize) -> f64 {
        self.0[m]
    }

    /// Copy with component `m` shifted by `delta`.
    pub fn perturbed(&self, m: usize, delta: f64) -> Self {
        let mut v = self.0.clone();
        v[m] += delta;
        Self(v)
    }
}

impl std::ops::Index<usize> for ThetaVector {
    type Output = f64;

    fn index(&self, m: usize) -> &f64 {
        &self.0[m]
    }
}

/// Known environmental parameters of the plume model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlumeEnvironment {
    /// Source height (m).
    pub z0: f64,
    /// Release rate (g/s).
    pub q0: f64,
    /// Mean wind speed along +x (m/s).
    pub wind_speed: f64,
    /// Crosswind spread rate (m/s).
    pub sigma_v: f64,
    /// Vertical spread rate (m/s).
    pub sigma_w: f64,
}

impl PlumeEnvironment {
    pub fn new(z0: f64, q0: f64, wind_speed: f64, sigma_v: f64, sigma_w: f64) -> Result<Self> {
        let env = Self {
            z0,
            q0,
            wind_speed,
            sigma_v,
            sigma_w,
        };
        env.validate()?;
        Ok(env)
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(
                    name,
                    format!("must be finite and > 0, got {v}"),
                ))
            }
        }
        positive("env.U", self.wind_speed)?;
        positive("source.Q0", self.q0)?;
        positive("env.sigma_v", self.sigma_v)?;
        positive("env.sigma_w", self.sigma_w)?;
        if !(self.z0.is_finite() && self.z0 >= 0.0) {
            return Err(Error::invalid(
                "source.z0",
                format!("must be >= 0, got {}", self.z0),
            ));
        }
        Ok(())
    }

    /// Crosswind and vertical spreads `(sigma_y, sigma_z)` at downwind distance `dx`.
    pub fn spreads(&self, dx: f64) -> (f64, f64) {
        (
            self.sigma_v * dx / self.wind_speed,
            self.sigma_w * dx / self.wind_speed,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorLocation {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl SensorLocation {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::invalid("sensor", "coordinates must be finite"));
        }
        Ok(Self { x, y, z })
    }

    /// Ground-level sensor. Panics on non-finite input.
    pub fn ground(x: f64, y: f64) -> Self {
        Self::new(x, y, 0.0).expect("finite sensor coordinates")
    }
}

/// Anything that maps a parameter vector to a per-sensor mean signal and
/// its gradient. The information-matrix and likelihood code is written
/// against this trait so alternative models can be plugged in.
pub trait ForwardModel: Sync {
    /// Number of unknown parameters.
    fn dim(&self) -> usize;

    fn concentration(&self, theta: &ThetaVector, sensor: &SensorLocation) -> Result<f64>;

    fn gradient(&self, theta: &ThetaVector, sensor: &SensorLocation) -> Result<Vec<f64>>;

    /// Upwind boundary in component 0, if the model has one. Finite
    /// differences must not straddle it.
    fn x_boundary(&self, _sensor: &SensorLocation) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasurementModel {
    GaussianPlume(PlumeEnvironment),
    /// Log-distance path loss with reference distance `d0` (m).
    /// Parameters are `[x0, y0, Q0]`.
    Rss {
        d0: f64,
    },
    Constant,
}

impl MeasurementModel {
    pub fn plume(env: PlumeEnvironment) -> Result<Self> {
        env.validate()?;
        Ok(Self::GaussianPlume(env))
    }

    pub fn rss(d0: f64) -> Result<Self> {
        if !(d0.is_finite() && d0 > 0.0) {
            return Err(Error::invalid("d0", "reference distance must be > 0"));
        }
        Ok(Self::Rss { d0 })
    }

    fn check_dim(&self, theta: &ThetaVector) -> Result<()> {
        let expected = ForwardModel::dim(self);
        if theta.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: theta.dim(),
            });
        }
        Ok(())
    }
}

impl ForwardModel for MeasurementModel {
    fn dim(&self) -> usize {
        match self {
            Self::GaussianPlume(_) => 2,
            Self::Rss { .. } => 3,
            Self::Constant => 1,
        }
    }

    fn concentration(&self, theta: &ThetaVector, sensor: &SensorLocation) -> Result<f64> {
        self.check_dim(theta)?;
        let c = match self {
            Self::GaussianPlume(env) => plume_concentration(env, theta[0], theta[1], sensor),
            Self::Rss { d0 } => {
                let r = distance(theta, sensor)?;
                theta[2] - 20.0 * (r / d0).log10()
            }
            Self::Constant => theta[0],
        };
        if !c.is_finite() {
            return Err(Error::NonFinite {
                what: "concentration",
            });
        }
        Ok(c)
    }

    fn gradient(&self, theta: &ThetaVector, sensor: &SensorLocation) -> Result<Vec<f64>> {
        self.check_dim(theta)?;
        let g = match self {
            Self::GaussianPlume(env) => {
                let (dx0, dy0) = plume_gradient(env, theta[0], theta[1], sensor);
                vec![dx0, dy0]
            }
            Self::Rss { .. } => {
                let r = distance(theta, sensor)?;
                let k = 20.0 / (LN_10 * r * r);
                vec![k * (sensor.x - theta[0]), k * (sensor.y - theta[1]), 1.0]
            }
            Self::Constant => vec![1.0],
        };
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "gradient" });
        }
        Ok(g)
    }

    fn x_boundary(&self, sensor: &SensorLocation) -> Option<f64> {
        match self {
            Self::GaussianPlume(_) => Some(sensor.x),
            _ => None,
        }
    }
}

fn distance(theta: &ThetaVector, sensor: &SensorLocation) -> Result<f64> {
    let r = (sensor.x - theta[0]).hypot(sensor.y - theta[1]);
    if r == 0.0 {
        return Err(Error::SensorAtSource);
    }
    Ok(r)
}

/// Ground-level plume concentration; exactly zero at or upwind of the source.
fn plume_concentration(env: &PlumeEnvironment, x0: f64, y0: f64, sensor: &SensorLocation) -> f64 {
    let dx = sensor.x - x0;
    if dx <= 0.0 {
        return 0.0;
    }
    let (sy, sz) = env.spreads(dx);
    let dy = sensor.y - y0;
    // Evaluated in log space: close to the source the prefactor overflows
    // while the vertical exponential underflows.
    let log_c = (env.q0 / (PI * env.wind_speed)).ln()
        - sy.ln()
        - sz.ln()
        - 0.5 * (env.z0 / sz).powi(2)
        - 0.5 * (dy / sy).powi(2);
    log_c.exp()
}

/// `(dC/dx0, dC/dy0)`.
///
/// `dC/dx0 = alpha + beta + gamma` where, with `C` the concentration,
/// `alpha = C sigma_w / (U sigma_z)`, `beta = C sigma_v / (U sigma_y)` and
/// `gamma = -C [ (y-y0)^2 sigma_v / (U sigma_y^3) + z0^2 sigma_w / (U sigma_z^3) ]`.
fn plume_gradient(env: &PlumeEnvironment, x0: f64, y0: f64, sensor: &SensorLocation) -> (f64, f64) {
    let c = plume_concentration(env, x0, y0, sensor);
    if c == 0.0 {
        return (0.0, 0.0);
    }
    let (sy, sz) = env.spreads(sensor.x - x0);
    let u = env.wind_speed;
    let dy = sensor.y - y0;
    let alpha = c * env.sigma_w / (u * sz);
    let beta = c * env.sigma_v / (u * sy);
    let gamma = c
        * (-(dy * dy) * env.sigma_v / (u * sy.powi(3))
            - env.z0 * env.z0 * env.sigma_w / (u * sz.powi(3)));
    let d_y0 = c * dy / (sy * sy);
    (alpha + beta + gamma, d_y0)
}

/// Central-difference gradient of `model.concentration` with step `step`.
///
/// Errors if the stencil `[x0 - h, x0 + h]` contains the model's upwind
/// boundary, where the plume is not differentiable.
pub fn finite_difference_gradient<M: ForwardModel + ?Sized>(
    model: &M,
    theta: &ThetaVector,
    sensor: &SensorLocation,
    step: f64,
) -> Result<Vec<f64>> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::invalid("step", "must be finite and > 0"));
    }
    if let Some(boundary) = model.x_boundary(sensor) {
        let x0 = theta[0];
        if x0 - step <= boundary && boundary <= x0 + step {
            return Err(Error::StencilCrossesBoundary { boundary });
        }
    }
    (0..theta.dim())
        .map(|m| {
            let plus = model.concentration(&theta.perturbed(m, step), sensor)?;
            let minus = model.concentration(&theta.perturbed(m, -step), sensor)?;
            Ok((plus - minus) / (2.0 * step))
        })
        .collect()
}
