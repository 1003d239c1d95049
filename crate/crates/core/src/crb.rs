//! Information matrices and the posterior Cramer-Rao bound.
//!
//! For binary sensors the data information at `theta` is
//!
//! ```text
//! J^d = sum_i rho(tau - C_i(theta)) * grad C_i * grad C_i^T
//! ```
//!
//! and the analog (unquantized) counterpart replaces `rho` by `1 / sigma^2`.
//! With a Gaussian prior of covariance `Sigma`, `J^p = Sigma^-1` and the
//! posterior bound is `(J^d + J^p)^-1`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{ForwardModel, SensorLocation, ThetaVector};
use crate::observation::{BinaryMeasurements, BinaryNetwork, NoiseModel};

/// Largest network for which [`FimMode::Exact`] enumerates all outcomes.
pub const MAX_EXACT_SENSORS: usize = 16;

/// Symmetric positive-semidefinite `M x M` information matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoMatrix(DMatrix<f64>);

impl InfoMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    /// Wrap a square matrix, checking symmetry.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::invalid(
                "information matrix",
                "must be square and non-empty",
            ));
        }
        for i in 0..m.nrows() {
            for j in 0..i {
                let (a, b) = (m[(i, j)], m[(j, i)]);
                if (a - b).abs() > 1e-12 * (1.0 + a.abs()) {
                    return Err(Error::invalid("information matrix", "must be symmetric"));
                }
            }
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "information matrix",
            });
        }
        Ok(Self(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    /// Rank-one update `self += w * g g^T`.
    fn add_outer(&mut self, weight: f64, g: &[f64]) {
        let n = self.dim();
        for i in 0..n {
            for j in 0..=i {
                let v = self.0[(i, j)] + weight * g[i] * g[j];
                self.0[(i, j)] = v;
                self.0[(j, i)] = v;
            }
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.0
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// All eigenvalues at or above `-tol * max(1, ||J||)`.
    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol * self.0.norm().max(1.0)
    }
}

impl std::ops::Add for &InfoMatrix {
    type Output = InfoMatrix;

    fn add(self, rhs: &InfoMatrix) -> InfoMatrix {
        InfoMatrix(&self.0 + &rhs.0)
    }
}

impl std::ops::Sub for &InfoMatrix {
    type Output = DMatrix<f64>;

    fn sub(self, rhs: &InfoMatrix) -> DMatrix<f64> {
        &self.0 - &rhs.0
    }
}

/// Independent Gaussian prior `N(mean, diag(variances))`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPrior {
    mean: ThetaVector,
    variances: Vec<f64>,
}

impl GaussianPrior {
    pub fn new(mean: ThetaVector, variances: Vec<f64>) -> Result<Self> {
        if variances.len() != mean.dim() {
            return Err(Error::DimensionMismatch {
                expected: mean.dim(),
                actual: variances.len(),
            });
        }
        if variances.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::invalid("prior", "variances must be finite and > 0"));
        }
        Ok(Self { mean, variances })
    }

    /// Prior from per-coordinate standard deviations.
    pub fn from_std(mean: ThetaVector, std: &[f64]) -> Result<Self> {
        Self::new(mean, std.iter().map(|s| s * s).collect())
    }

    pub fn mean(&self) -> &ThetaVector {
        &self.mean
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    pub fn dim(&self) -> usize {
        self.variances.len()
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(&self.variances))
    }

    /// Unnormalized log density.
    pub fn log_density(&self, theta: &ThetaVector) -> f64 {
        theta
            .values()
            .iter()
            .zip(self.mean.values())
            .zip(&self.variances)
            .map(|((x, m), v)| -0.5 * (x - m) * (x - m) / v)
            .sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ThetaVector {
        let values = self
            .mean
            .values()
            .iter()
            .zip(&self.variances)
            .map(|(m, v)| {
                let z: f64 = rng.sample(StandardNormal);
                m + v.sqrt() * z
            })
            .collect();
        ThetaVector::new(values).expect("finite prior sample")
    }
}

/// `J^p = Sigma^-1`.
pub fn prior_information(prior: &GaussianPrior) -> InfoMatrix {
    let inv: Vec<f64> = prior.variances.iter().map(|v| 1.0 / v).collect();
    InfoMatrix(DMatrix::from_diagonal(&DVector::from_vec(inv)))
}

/// Binary-sensor data information `J^d` at `theta`.
///
/// Sensors with an identically zero gradient (upwind of a plume) are
/// skipped, and sensors whose `rho` underflows contribute exactly zero.
pub fn data_information_matrix<M: ForwardModel>(
    network: &BinaryNetwork<M>,
    theta: &ThetaVector,
) -> Result<InfoMatrix> {
    let tau = network.tau.value();
    let mut j = InfoMatrix::zeros(theta.dim());
    for sensor in &network.sensors {
        let g = network.model.gradient(theta, sensor)?;
        if g.iter().all(|&v| v == 0.0) {
            continue;
        }
        let c = network.model.concentration(theta, sensor)?;
        let w = network.noise.rho(tau - c);
        if w > 0.0 {
            j.add_outer(w, &g);
        }
    }
    Ok(j)
}

/// Analog (unquantized) data information `(1/sigma^2) sum_i g_i g_i^T`.
pub fn analog_information_matrix<M: ForwardModel + ?Sized>(
    model: &M,
    sensors: &[SensorLocation],
    noise: &NoiseModel,
    theta: &ThetaVector,
) -> Result<InfoMatrix> {
    let w = 1.0 / (noise.sigma() * noise.sigma());
    let mut j = InfoMatrix::zeros(theta.dim());
    for sensor in sensors {
        let g = model.gradient(theta, sensor)?;
        j.add_outer(w, &g);
    }
    Ok(j)
}

/// `(J^d + J^p)^-1`.
pub fn posterior_crb(jd: &InfoMatrix, jp: &InfoMatrix) -> Result<DMatrix<f64>> {
    if jd.dim() != jp.dim() {
        return Err(Error::DimensionMismatch {
            expected: jp.dim(),
            actual: jd.dim(),
        });
    }
    invert_spd(&(jd + jp).0)
}

/// Inverse of a symmetric positive-definite matrix: closed-form adjugate in
/// two dimensions, Cholesky otherwise.
pub fn invert_spd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if m.nrows() == 2 && m.ncols() == 2 {
        let (a, b, d) = (m[(0, 0)], 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)]);
        let det = a * d - b * b;
        if !(a > 0.0 && det > 0.0 && det.is_finite()) {
            return Err(Error::SingularMatrix);
        }
        return Ok(DMatrix::from_row_slice(
            2,
            2,
            &[d / det, -b / det, -b / det, a / det],
        ));
    }
    let inv = m.clone().cholesky().ok_or(Error::SingularMatrix)?.inverse();
    if inv.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularMatrix);
    }
    Ok(inv)
}

/// Standard deviation of the localization error, `sqrt(trace(crb))`.
pub fn localization_sigma(crb: &DMatrix<f64>) -> Result<f64> {
    let t = crb.trace();
    if t < 0.0 {
        return Err(Error::NegativeTrace(t));
    }
    if !t.is_finite() {
        return Err(Error::NonFinite { what: "trace" });
    }
    Ok(t.sqrt())
}

/// How [`empirical_information_matrix`] takes the expectation over `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FimMode {
    /// Probability-weighted sum over all `2^S` outcomes.
    Exact,
    /// Average over `n_samples` simulated measurement vectors.
    Sampled { n_samples: usize, seed: u64 },
}

#[derive(Debug, Clone)]
pub struct EmpiricalInformation {
    pub matrix: DMatrix<f64>,
    /// Entrywise standard error of the mean (sampling mode only).
    pub standard_error: Option<DMatrix<f64>>,
}

/// `E_b[score(b) score(b)^T]` at `theta`, computed without `rho`, which
/// makes it an independent check on [`data_information_matrix`].
pub fn empirical_information_matrix<M: ForwardModel>(
    network: &BinaryNetwork<M>,
    theta: &ThetaVector,
    mode: FimMode,
) -> Result<EmpiricalInformation> {
    let dim = theta.dim();
    match mode {
        FimMode::Exact => {
            let s = network.len();
            if s > MAX_EXACT_SENSORS {
                return Err(Error::invalid(
                    "mode",
                    format!(
                        "exact enumeration supports at most {MAX_EXACT_SENSORS} sensors, got {s}"
                    ),
                ));
            }
            let mut acc = DMatrix::zeros(dim, dim);
            for idx in 0..(1u64 << s) {
                let b = BinaryMeasurements::from_index(idx, s);
                let p = network.probability(&b, theta)?;
                if p == 0.0 {
                    continue;
                }
                let g = DVector::from_vec(network.score(&b, theta)?);
                acc += p * &g * g.transpose();
            }
            Ok(EmpiricalInformation {
                matrix: acc,
                standard_error: None,
            })
        }
        FimMode::Sampled { n_samples, seed } => {
            if n_samples < 2 {
                return Err(Error::invalid("n_samples", "need at least two samples"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut sum = DMatrix::zeros(dim, dim);
            let mut sum_sq = DMatrix::zeros(dim, dim);
            for _ in 0..n_samples {
                let b = network.simulate_with(theta, &mut rng)?;
                let g = DVector::from_vec(network.score(&b, theta)?);
                let outer = &g * g.transpose();
                sum_sq += outer.component_mul(&outer);
                sum += outer;
            }
            let n = n_samples as f64;
            let mean = sum / n;
            let var = (sum_sq / n - mean.component_mul(&mean)) * (n / (n - 1.0));
            let se = var.map(|v| (v.max(0.0) / n).sqrt());
            Ok(EmpiricalInformation {
                matrix: mean,
                standard_error: Some(se),
            })
        }
    }
}
