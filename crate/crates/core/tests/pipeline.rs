//! End-to-end statistical checks of simulation, estimation and validation.

use binary_crb::cli::{exit_code_for, EXIT_OK};
use binary_crb::experiment::{monte_carlo_rms, table1_base};
use binary_crb::mcmc::{self, McmcConfig};
use binary_crb::model::{
    ForwardModel, MeasurementModel, PlumeEnvironment, SensorLocation, ThetaVector,
};
use binary_crb::scenario::{grid_placement, PlacementSpec};
use binary_crb::validate::{check_plume_gradient, run_suite_with};
use binary_crb::Result;

#[test]
fn detection_frequency_matches_probability() {
    let scenario = table1_base().unwrap();
    let network = scenario.network();
    let q = network
        .detection_probabilities(&scenario.theta_true)
        .unwrap();
    let n = 100_000;
    let mut counts = vec![0usize; q.len()];
    for seed in 0..n {
        let b = network.simulate(&scenario.theta_true, seed).unwrap();
        for (c, &bit) in counts.iter_mut().zip(b.bits()) {
            *c += bit as usize;
        }
    }
    for (c, &p) in counts.iter().zip(&q) {
        let freq = *c as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt().max(1e-6);
        assert!((freq - p).abs() < 5.0 * se, "freq {freq} vs q {p}");
    }
}

#[test]
fn initialization_rarely_fails() {
    for placement in 1..=3 {
        let scenario = table1_base()
            .unwrap()
            .with_sensors(grid_placement(&PlacementSpec::table1(placement).unwrap()).unwrap())
            .unwrap();
        let network = scenario.network();
        let cfg = McmcConfig::default();
        let mut ok = 0;
        for seed in 0..200 {
            let b = network.simulate(&scenario.theta_true, seed).unwrap();
            if mcmc::initialize(&network, &scenario.prior, &b, &cfg.clone().with_seed(seed)).is_ok()
            {
                ok += 1;
            }
        }
        assert!(ok as f64 / 200.0 > 0.99, "placement {placement}: {ok}/200");
    }
}

#[test]
fn chain_acceptance_rate_is_interior() {
    let summary = monte_carlo_rms(
        &table1_base().unwrap(),
        &McmcConfig::default().with_samples(2000),
        10,
        5,
    )
    .unwrap();
    assert_eq!(summary.failures(), 0);
    for r in &summary.records {
        let rate = r.outcome.unwrap().acceptance_rate;
        assert!(rate > 0.0 && rate < 1.0, "{rate}");
    }
    assert!(summary.rms.is_finite());
}

/// Plume model with the sign of the crosswind derivative flipped.
struct FlippedY(MeasurementModel);

impl ForwardModel for FlippedY {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn concentration(&self, theta: &ThetaVector, sensor: &SensorLocation) -> Result<f64> {
        self.0.concentration(theta, sensor)
    }

    fn gradient(&self, theta: &ThetaVector, sensor: &SensorLocation) -> Result<Vec<f64>> {
        let mut g = self.0.gradient(theta, sensor)?;
        g[1] = -g[1];
        Ok(g)
    }

    fn x_boundary(&self, sensor: &SensorLocation) -> Option<f64> {
        self.0.x_boundary(sensor)
    }
}

fn flipped(env: PlumeEnvironment) -> FlippedY {
    FlippedY(MeasurementModel::GaussianPlume(env))
}

#[test]
fn validation_catches_wrong_gradient_sign() {
    assert!(!check_plume_gradient(&flipped, 100, 1).unwrap().passed());
    let report = run_suite_with(flipped).unwrap();
    assert_ne!(exit_code_for(&report), EXIT_OK);
}

#[test]
fn validation_passes_for_correct_model() {
    let report = run_suite_with(MeasurementModel::GaussianPlume).unwrap();
    assert_eq!(exit_code_for(&report), EXIT_OK, "{report}");
}
