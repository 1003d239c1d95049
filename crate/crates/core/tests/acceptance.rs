//! Acceptance suite. Each test prints one `criterion N: PASS|FAIL` line;
//! run with `--nocapture` to see them.

use std::f64::consts::PI;

use binary_crb::crb::{
    analog_information_matrix, data_information_matrix, empirical_information_matrix,
    posterior_crb, prior_information, FimMode, GaussianPrior, InfoMatrix,
};
use binary_crb::experiment::{
    default_tau_grid, monte_carlo_rms, reproduce_table1, table1_base, threshold_sweep,
    write_runs_csv, write_sweep_csv, write_table1_csv, TABLE1_RUNS,
};
use binary_crb::mcmc::McmcConfig;
use binary_crb::model::{ForwardModel, MeasurementModel, SensorLocation, ThetaVector};
use binary_crb::observation::{BinaryMeasurements, BinaryNetwork, NoiseModel, Threshold};
use binary_crb::scenario::{grid_placement, PlacementSpec, Scenario};
use binary_crb::validate::{random_downwind_sensor, random_plume_case, random_plume_network};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(n: u32, ok: bool, detail: &str) {
    println!(
        "criterion {n}: {} {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {n} failed: {detail}");
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value - target).abs() <= rel * target
}

fn placement(n: usize) -> Vec<SensorLocation> {
    grid_placement(&PlacementSpec::table1(n).unwrap()).unwrap()
}

fn min_eig(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.min()
}

#[test]
fn criterion_1_table1_bound() {
    let base = table1_base().unwrap();
    let sigma: Vec<f64> = (1..=3)
        .map(|p| {
            base.with_sensors(placement(p))
                .unwrap()
                .sigma_crb()
                .unwrap()
        })
        .collect();
    let ok = within(sigma[0], 5.75, 0.03)
        && within(sigma[1], 3.93, 0.10)
        && within(sigma[2], 0.68, 0.03);
    report(
        1,
        ok,
        &format!(
            "sigma_crb = {:.3} / {:.3} / {:.3} m, expected 5.75 (3%) / 3.93 (10%) / 0.68 (3%)",
            sigma[0], sigma[1], sigma[2]
        ),
    );
}

#[test]
fn criterion_2_table1_rms() {
    let rows = reproduce_table1(
        &table1_base().unwrap(),
        &McmcConfig::default(),
        TABLE1_RUNS,
        0,
    )
    .unwrap();
    let rms: Vec<f64> = rows.iter().map(|r| r.rms_error).collect();
    let failures: usize = rows.iter().map(|r| r.failures).sum();
    let ok =
        within(rms[0], 7.33, 0.40) && within(rms[1], 4.08, 0.40) && (0.68..=4.0).contains(&rms[2]);
    report(
        2,
        ok,
        &format!(
            "rms = {:.3} / {:.3} / {:.3} m over {TABLE1_RUNS} runs ({failures} failed), expected 7.33 (40%) / 4.08 (40%) / [0.68, 4.0]",
            rms[0], rms[1], rms[2]
        ),
    );
}

#[test]
fn criterion_3_threshold_sweep() {
    let taus = default_tau_grid();
    let mut ok = true;
    let mut detail = Vec::new();
    for (label, spec) in [
        ("S=27", PlacementSpec::sparse_field()),
        ("S=10000", PlacementSpec::dense_field()),
    ] {
        let scenario = Scenario::reference(grid_placement(&spec).unwrap()).unwrap();
        let sweep = threshold_sweep(&scenario, &taus).unwrap();
        let prior = (2.0f64 * 500.0 * 500.0).sqrt();
        let ends = [
            sweep[0].sigma_crb_binary,
            sweep[sweep.len() - 1].sigma_crb_binary,
        ];
        let ends_ok = ends.iter().all(|&s| within(s, prior, 0.005));
        let analog = sweep[0].sigma_crb_analog;
        let best = sweep
            .iter()
            .map(|r| r.sigma_crb_binary)
            .fold(f64::INFINITY, f64::min);
        let above = best > analog;
        ok &= ends_ok && above;
        if label == "S=27" {
            let analog_ok = (0.25..=0.35).contains(&analog);
            ok &= analog_ok;
            detail.push(format!(
                "{label}: analog {analog:.4} m in [0.25, 0.35]: {analog_ok}"
            ));
        }
        detail.push(format!(
            "{label}: endpoints {:.2}/{:.2} m, min {best:.4} m > analog {analog:.4} m: {above}",
            ends[0], ends[1]
        ));
    }
    report(3, ok, &detail.join("; "));
}

#[test]
fn criterion_4_rho() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut ok = true;
    let mut worst_peak = 0.0f64;
    for sigma in [1e-4, 1.0, 10.0] {
        let n = NoiseModel::new(sigma).unwrap();
        let peak = 2.0 / (PI * sigma * sigma);
        let rel = (n.rho(0.0) - peak).abs() / peak;
        worst_peak = worst_peak.max(rel);
        ok &= rel < 1e-10;
        for _ in 0..10_000 {
            let u = rng.random_range(-50.0..50.0) * sigma;
            ok &= n.rho(u) < 1.0 / (sigma * sigma);
        }
        for u in [-10.0 * sigma, 10.0 * sigma] {
            ok &= n.rho(u) < 1e-15 / (sigma * sigma);
        }
    }
    report(
        4,
        ok,
        &format!("peak relative error {worst_peak:.2e}; bound and tails checked"),
    );
}

#[test]
fn criterion_5_gradient_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (env, theta, sensor) = random_plume_case(&mut rng);
        let model = MeasurementModel::plume(env).unwrap();
        let analytic = model.gradient(&theta, &sensor).unwrap();
        let h = 1e-4;
        let scale = analytic.iter().fold(0.0f64, |s, g| s.max(g.abs()));
        for (m, g) in analytic.iter().enumerate() {
            let up = model
                .concentration(&theta.perturbed(m, h), &sensor)
                .unwrap();
            let down = model
                .concentration(&theta.perturbed(m, -h), &sensor)
                .unwrap();
            let fd = (up - down) / (2.0 * h);
            worst = worst.max((g - fd).abs() / scale);
        }
    }
    report(
        5,
        worst < 1e-6,
        &format!("max relative error {worst:.2e} over 100 cases (tol 1e-6)"),
    );
}

#[test]
fn criterion_6_empirical_fim() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for k in 0..40 {
        let s = 1 + k % 8;
        let (network, theta) =
            random_plume_network(&MeasurementModel::GaussianPlume, s, &mut rng).unwrap();
        let closed = data_information_matrix(&network, &theta).unwrap();
        let exact = empirical_information_matrix(&network, &theta, FimMode::Exact).unwrap();
        let scale = closed.matrix().amax();
        worst = worst.max((closed.matrix() - &exact.matrix).amax() / scale);
    }
    let exact_ok = worst < 1e-10;

    let (network, theta) =
        random_plume_network(&MeasurementModel::GaussianPlume, 8, &mut rng).unwrap();
    let closed = data_information_matrix(&network, &theta).unwrap();
    let sampled = empirical_information_matrix(
        &network,
        &theta,
        FimMode::Sampled {
            n_samples: 100_000,
            seed: 6,
        },
    )
    .unwrap();
    let se = sampled.standard_error.unwrap();
    let mut z_max = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            z_max = z_max.max((sampled.matrix[(i, j)] - closed.get(i, j)).abs() / se[(i, j)]);
        }
    }
    let sampled_ok = z_max < 3.0;
    report(
        6,
        exact_ok && sampled_ok,
        &format!(
            "exact max relative error {worst:.2e} (tol 1e-10); sampled max |z| {z_max:.2} (tol 3)"
        ),
    );
}

#[test]
fn criterion_7_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures = Vec::new();

    // Information matrices on random networks and thresholds.
    for _ in 0..200 {
        let (env, theta, _) = random_plume_case(&mut rng);
        let model = MeasurementModel::plume(env).unwrap();
        let sensors: Vec<_> = (0..rng.random_range(1..20))
            .map(|_| random_downwind_sensor(&env, &theta, &mut rng))
            .collect();
        let sigma = 10f64.powf(rng.random_range(-6.0..-2.0));
        let tau = 10f64.powf(rng.random_range(-6.0..0.0));
        let noise = NoiseModel::new(sigma).unwrap();
        let network =
            BinaryNetwork::new(model, sensors.clone(), noise, Threshold::new(tau).unwrap())
                .unwrap();
        let jd = data_information_matrix(&network, &theta).unwrap();
        let m = jd.matrix();
        if (m - m.transpose()).amax() != 0.0 || !jd.is_psd(1e-12) {
            failures.push("J^d symmetric PSD");
        }
        let analog = analog_information_matrix(&model, &sensors, &noise, &theta).unwrap();
        let gap = &analog - &jd;
        if min_eig(&gap) < -1e-12 * analog.matrix().norm() {
            failures.push("analog - binary PSD");
        }
        let prior = GaussianPrior::from_std(theta.clone(), &[500.0, 500.0]).unwrap();
        let crb = posterior_crb(&jd, &prior_information(&prior)).unwrap();
        if min_eig(&(prior.covariance() - &crb)) < -1e-9 * prior.covariance().norm() {
            failures.push("posterior CRB below prior covariance");
        }
    }

    // Nested placements and a nested sequence of random subsets.
    let base = table1_base().unwrap();
    let nested: Vec<f64> = (1..=3)
        .map(|p| {
            base.with_sensors(placement(p))
                .unwrap()
                .sigma_crb()
                .unwrap()
        })
        .collect();
    if !(nested[0] >= nested[1] && nested[1] >= nested[2]) {
        failures.push("nested placement monotonicity");
    }
    let all = grid_placement(&PlacementSpec::uniform(12, 6)).unwrap();
    let mut previous = f64::INFINITY;
    for k in 1..=all.len() {
        let s = base
            .with_sensors(all[..k].to_vec())
            .unwrap()
            .sigma_crb()
            .unwrap();
        if s > previous * (1.0 + 1e-12) {
            failures.push("prefix monotonicity");
            break;
        }
        previous = s;
    }

    // Likelihood normalization over every outcome.
    let mut norm_err = 0.0f64;
    for s in 1..=10 {
        let (network, theta) =
            random_plume_network(&MeasurementModel::GaussianPlume, s, &mut rng).unwrap();
        let total: f64 = (0..(1u64 << s))
            .map(|idx| {
                network
                    .probability(&BinaryMeasurements::from_index(idx, s), &theta)
                    .unwrap()
            })
            .sum();
        norm_err = norm_err.max((total - 1.0).abs());
    }
    if norm_err >= 1e-10 {
        failures.push("likelihood normalization");
    }

    // Constant model: J^d = S rho(tau - theta) exactly.
    for s in [1usize, 3, 10] {
        for (theta, tau, sigma) in [(0.0, 0.0, 1.0), (2.0, 2.5, 0.7), (-1.0, 3.0, 2.0)] {
            let noise = NoiseModel::new(sigma).unwrap();
            let sensors = vec![SensorLocation::ground(0.0, 0.0); s];
            let net = BinaryNetwork::new(
                MeasurementModel::Constant,
                sensors,
                noise,
                Threshold::new(tau).unwrap(),
            )
            .unwrap();
            let th = ThetaVector::new(vec![theta]).unwrap();
            let jd = data_information_matrix(&net, &th).unwrap();
            let expected = InfoMatrix::from_matrix(DMatrix::from_element(
                1,
                1,
                s as f64 * noise.rho(tau - theta),
            ))
            .unwrap();
            if (jd.get(0, 0) - expected.get(0, 0)).abs() > 1e-12 * expected.get(0, 0) {
                failures.push("constant-model special case");
            }
        }
    }

    failures.dedup();
    report(
        7,
        failures.is_empty(),
        &format!("normalization error {norm_err:.1e}; violations: {failures:?}"),
    );
}

#[test]
fn criterion_8_determinism() {
    fn outputs() -> (Vec<u8>, Vec<u8>, Vec<u8>) {
        let scenario = table1_base().unwrap();
        let mut sweep = Vec::new();
        write_sweep_csv(
            &mut sweep,
            &threshold_sweep(&scenario, &default_tau_grid()).unwrap(),
        )
        .unwrap();
        let cfg = McmcConfig::default().with_samples(500);
        let mut runs = Vec::new();
        write_runs_csv(
            &mut runs,
            &monte_carlo_rms(&scenario, &cfg, 16, 42).unwrap().records,
        )
        .unwrap();
        let mut table = Vec::new();
        write_table1_csv(
            &mut table,
            &reproduce_table1(&scenario, &cfg, 4, 42).unwrap(),
        )
        .unwrap();
        (sweep, runs, table)
    }
    let first = outputs();
    let second = outputs();
    report(
        8,
        first == second,
        &format!(
            "sweep {} bytes, runs {} bytes, table1 {} bytes identical across two runs",
            first.0.len(),
            first.1.len(),
            first.2.len()
        ),
    );
}
