//! Built-in oracle checks: analytic gradients against finite differences,
//! the closed-form information matrix against exact enumeration of the
//! score outer product, likelihood normalization and the `rho` bounds.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::crb::{data_information_matrix, empirical_information_matrix, FimMode};
use crate::error::Result;
use crate::model::{
    finite_difference_gradient, ForwardModel, MeasurementModel, PlumeEnvironment, SensorLocation,
    ThetaVector, DEFAULT_FD_STEP,
};
use crate::observation::{BinaryMeasurements, BinaryNetwork, NoiseModel, Threshold};

pub const GRADIENT_TOLERANCE: f64 = 1e-6;
pub const SCORE_TOLERANCE: f64 = 1e-5;
pub const ENUMERATION_TOLERANCE: f64 = 1e-10;
pub const GRADIENT_CASES: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.max_error < self.tolerance
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:<40} cases={:<5} max_error={:.3e} tol={:.1e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.max_error,
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// `max_m |a_m - b_m| / max_m |a_m|`.
pub fn vector_relative_error(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let diff = a
        .iter()
        .zip(b)
        .fold(0.0f64, |s, (x, y)| s.max((x - y).abs()));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// A random plume environment near the reference parameters.
pub fn random_environment<R: Rng>(rng: &mut R) -> PlumeEnvironment {
    PlumeEnvironment {
        z0: rng.random_range(0.0..8.0),
        q0: rng.random_range(1.0..10.0),
        wind_speed: rng.random_range(2.0..6.0),
        sigma_v: rng.random_range(0.3..0.8),
        sigma_w: rng.random_range(0.1..0.4),
    }
}

/// A sensor 20-250 m downwind of `theta` where the signal is not
/// negligible: the source height is within three vertical spreads and the
/// crosswind offset within three crosswind spreads.
pub fn random_downwind_sensor<R: Rng>(
    env: &PlumeEnvironment,
    theta: &ThetaVector,
    rng: &mut R,
) -> SensorLocation {
    let min_dx = 3.0f64.recip() * env.z0 * env.wind_speed / env.sigma_w;
    let dx = rng.random_range(20.0f64.max(min_dx)..250.0f64.max(min_dx + 1.0));
    let (sy, _) = env.spreads(dx);
    let dy = rng.random_range(-3.0..3.0) * sy;
    SensorLocation::ground(theta[0] + dx, theta[1] + dy)
}

pub fn random_plume_case<R: Rng>(rng: &mut R) -> (PlumeEnvironment, ThetaVector, SensorLocation) {
    let env = random_environment(rng);
    let theta = ThetaVector::xy(rng.random_range(-20.0..40.0), rng.random_range(-20.0..40.0))
        .expect("finite");
    let sensor = random_downwind_sensor(&env, &theta, rng);
    (env, theta, sensor)
}

/// Analytic gradient versus central differences over random plume cases.
pub fn check_plume_gradient<M, F>(make_model: &F, cases: usize, seed: u64) -> Result<CheckResult>
where
    M: ForwardModel,
    F: Fn(PlumeEnvironment) -> M,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_error = 0.0f64;
    for _ in 0..cases {
        let (env, theta, sensor) = random_plume_case(&mut rng);
        let model = make_model(env);
        let analytic = model.gradient(&theta, &sensor)?;
        let numeric = finite_difference_gradient(&model, &theta, &sensor, DEFAULT_FD_STEP)?;
        max_error = max_error.max(vector_relative_error(&analytic, &numeric));
    }
    Ok(CheckResult {
        name: "plume gradient vs finite differences",
        cases,
        max_error,
        tolerance: GRADIENT_TOLERANCE,
    })
}

pub fn check_rss_gradient(cases: usize, seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = MeasurementModel::rss(1.0)?;
    let mut max_error = 0.0f64;
    for _ in 0..cases {
        let theta = ThetaVector::new(vec![
            rng.random_range(-50.0..50.0),
            rng.random_range(-50.0..50.0),
            rng.random_range(-60.0..0.0),
        ])?;
        let angle: f64 = rng.random_range(0.0..2.0 * PI);
        let r: f64 = rng.random_range(5.0..200.0);
        let sensor = SensorLocation::ground(theta[0] + r * angle.cos(), theta[1] + r * angle.sin());
        let analytic = model.gradient(&theta, &sensor)?;
        let numeric = finite_difference_gradient(&model, &theta, &sensor, DEFAULT_FD_STEP)?;
        max_error = max_error.max(vector_relative_error(&analytic, &numeric));
    }
    Ok(CheckResult {
        name: "rss gradient vs finite differences",
        cases,
        max_error,
        tolerance: GRADIENT_TOLERANCE,
    })
}

/// Random plume network of `sensors` sensors whose concentrations straddle
/// the threshold, so most of them carry information.
pub fn random_plume_network<M, F, R>(
    make_model: &F,
    sensors: usize,
    rng: &mut R,
) -> Result<(BinaryNetwork<M>, ThetaVector)>
where
    M: ForwardModel,
    F: Fn(PlumeEnvironment) -> M,
    R: Rng,
{
    let (env, theta, _) = random_plume_case(rng);
    let locations: Vec<_> = (0..sensors)
        .map(|_| random_downwind_sensor(&env, &theta, rng))
        .collect();
    let reference = MeasurementModel::GaussianPlume(env);
    let concentrations = locations
        .iter()
        .map(|s| reference.concentration(&theta, s))
        .collect::<Result<Vec<_>>>()?;
    let mut sorted = concentrations.clone();
    sorted.sort_by(f64::total_cmp);
    let tau = sorted[sorted.len() / 2].max(1e-12);
    let sigma = (0.5 * tau).max(1e-12);
    let network = BinaryNetwork::new(
        make_model(env),
        locations,
        NoiseModel::new(sigma)?,
        Threshold::new(tau)?,
    )?;
    Ok((network, theta))
}

/// Exact `E[score score^T]` versus the closed-form information matrix.
pub fn check_information_enumeration<M, F>(
    make_model: &F,
    cases: usize,
    seed: u64,
) -> Result<CheckResult>
where
    M: ForwardModel,
    F: Fn(PlumeEnvironment) -> M,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_error = 0.0f64;
    for k in 0..cases {
        let s = 2 + k % 7;
        let (network, theta) = random_plume_network(make_model, s, &mut rng)?;
        let closed = data_information_matrix(&network, &theta)?;
        let exact = empirical_information_matrix(&network, &theta, FimMode::Exact)?;
        let scale = closed.matrix().amax().max(f64::MIN_POSITIVE);
        let diff = (closed.matrix() - &exact.matrix).amax();
        max_error = max_error.max(diff / scale);
    }
    Ok(CheckResult {
        name: "information matrix vs exact enumeration",
        cases,
        max_error,
        tolerance: ENUMERATION_TOLERANCE,
    })
}

/// `sum_b p(b | theta) == 1` over all outcomes for networks of up to 10 sensors.
pub fn check_likelihood_normalization(cases: usize, seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_error = 0.0f64;
    for k in 0..cases {
        let s = 1 + k % 10;
        let (network, theta) = random_plume_network(&MeasurementModel::GaussianPlume, s, &mut rng)?;
        let mut total = 0.0;
        for idx in 0..(1u64 << s) {
            total += network
                .log_likelihood(&BinaryMeasurements::from_index(idx, s), &theta)?
                .exp();
        }
        max_error = max_error.max((total - 1.0).abs());
    }
    Ok(CheckResult {
        name: "likelihood normalization",
        cases,
        max_error,
        tolerance: ENUMERATION_TOLERANCE,
    })
}

/// Score versus central differences of the log-likelihood at simulated outcomes.
pub fn check_score<M, F>(make_model: &F, cases: usize, seed: u64) -> Result<CheckResult>
where
    M: ForwardModel,
    F: Fn(PlumeEnvironment) -> M,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_error = 0.0f64;
    for _ in 0..cases {
        let s = 4;
        let (network, theta) = random_plume_network(make_model, s, &mut rng)?;
        // Simulated rather than arbitrary outcomes keep every bit away from
        // the probability floor, where the clamped likelihood is flat.
        let b = network.simulate_with(&theta, &mut rng)?;
        let score = network.score(&b, &theta)?;
        let h = DEFAULT_FD_STEP;
        let fd = (0..theta.dim())
            .map(|m| {
                Ok((network.log_likelihood(&b, &theta.perturbed(m, h))?
                    - network.log_likelihood(&b, &theta.perturbed(m, -h))?)
                    / (2.0 * h))
            })
            .collect::<Result<Vec<_>>>()?;
        max_error = max_error.max(vector_relative_error(&score, &fd));
    }
    Ok(CheckResult {
        name: "score vs finite differences",
        cases,
        max_error,
        tolerance: SCORE_TOLERANCE,
    })
}

/// Relative error of the `rho` peak; infinite if any sample reaches the
/// analog weight or the tails at 10 sigma exceed 1e-15 / sigma^2.
pub fn check_rho(samples: usize, seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_error = 0.0f64;
    for sigma in [1e-4, 1.0, 25.0] {
        let n = NoiseModel::new(sigma)?;
        let peak = 2.0 / (PI * sigma * sigma);
        max_error = max_error.max((n.rho(0.0) - peak).abs() / peak);
        for _ in 0..samples {
            let u = rng.random_range(-20.0..20.0) * sigma;
            if n.rho(u) >= 1.0 / (sigma * sigma) {
                max_error = f64::INFINITY;
            }
        }
        for u in [-10.0 * sigma, 10.0 * sigma] {
            if n.rho(u) * sigma * sigma >= 1e-15 {
                max_error = f64::INFINITY;
            }
        }
    }
    Ok(CheckResult {
        name: "rho peak, analog bound and tails",
        cases: samples * 3,
        max_error,
        tolerance: 1e-10,
    })
}

/// Run every check against `make_model` (the plume model in production,
/// a deliberately broken one in mutation tests).
pub fn run_suite_with<M, F>(make_model: F) -> Result<ValidationReport>
where
    M: ForwardModel,
    F: Fn(PlumeEnvironment) -> M,
{
    let checks = vec![
        check_plume_gradient(&make_model, GRADIENT_CASES, 1)?,
        check_rss_gradient(GRADIENT_CASES, 2)?,
        check_information_enumeration(&make_model, 20, 3)?,
        check_likelihood_normalization(20, 4)?,
        check_score(&make_model, 50, 5)?,
        check_rho(10_000, 6)?,
    ];
    Ok(ValidationReport { checks })
}

pub fn run_suite() -> Result<ValidationReport> {
    run_suite_with(MeasurementModel::GaussianPlume)
}
