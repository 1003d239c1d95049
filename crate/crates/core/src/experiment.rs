//! Threshold sweeps, Monte Carlo RMS campaigns and their CSV output.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mcmc::{self, McmcConfig};
use crate::scenario::{grid_placement, logspace, PlacementSpec, Scenario};

/// Threshold used for the three-placement comparison (g/m^3).
pub const TABLE1_TAU: f64 = 0.0018;

/// Monte Carlo runs per placement in the three-placement comparison.
pub const TABLE1_RUNS: usize = 200;

/// Thresholds far outside the concentration range, where no sensor is informative.
pub const EXTREME_TAUS: [f64; 2] = [-1e6, 1e6];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    pub tau: f64,
    pub sigma_crb_binary: f64,
    pub sigma_crb_analog: f64,
    pub sigma_prior: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunEstimate {
    pub x: f64,
    pub y: f64,
    pub error: f64,
    pub acceptance_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    /// `None` when the estimator could not be initialized; such runs are
    /// left out of the RMS.
    pub outcome: Option<RunEstimate>,
}

impl RunRecord {
    pub fn failed(&self) -> bool {
        self.outcome.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloSummary {
    /// RMS localization error over successful runs (NaN if none succeeded).
    pub rms: f64,
    pub records: Vec<RunRecord>,
}

impl MonteCarloSummary {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.failed()).count()
    }

    pub fn successes(&self) -> usize {
        self.records.len() - self.failures()
    }

    pub fn mean_acceptance(&self) -> f64 {
        let rates: Vec<f64> = self
            .records
            .iter()
            .filter_map(|r| r.outcome.map(|o| o.acceptance_rate))
            .collect();
        rates.iter().sum::<f64>() / rates.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Row {
    pub placement: usize,
    pub sensors: usize,
    pub sigma_crb: f64,
    pub rms_error: f64,
    pub n_runs: usize,
    pub failures: usize,
}

/// 200 log-spaced thresholds in `[1e-6, 1e-1]` bracketed by [`EXTREME_TAUS`].
pub fn default_tau_grid() -> Vec<f64> {
    let mut taus = vec![EXTREME_TAUS[0]];
    taus.extend(logspace(1e-6, 1e-1, 200));
    taus.push(EXTREME_TAUS[1]);
    taus
}

/// `n` thresholds between `min` and `max`: log-spaced when both are
/// positive, linear otherwise.
pub fn tau_grid(min: f64, max: f64, n: usize) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite() && min < max) {
        return Err(Error::invalid("tau range", "need finite tau_min < tau_max"));
    }
    if n < 2 {
        return Err(Error::invalid("points", "need at least 2 points"));
    }
    Ok(if min > 0.0 {
        logspace(min, max, n)
    } else {
        crate::scenario::linspace(min, max, n)
    })
}

/// Binary, analog and prior localization bounds at each threshold.
pub fn threshold_sweep(scenario: &Scenario, taus: &[f64]) -> Result<Vec<SweepRecord>> {
    if taus.is_empty() {
        return Err(Error::invalid("tau_values", "need at least one threshold"));
    }
    let sigma_analog = scenario.sigma_analog()?;
    let sigma_prior = scenario.sigma_prior();
    taus.par_iter()
        .map(|&tau| {
            Ok(SweepRecord {
                tau,
                sigma_crb_binary: scenario.with_tau(tau)?.sigma_crb()?,
                sigma_crb_analog: sigma_analog,
                sigma_prior,
            })
        })
        .collect()
}

/// Simulate, estimate and score one run.
fn single_run(
    scenario: &Scenario,
    config: &McmcConfig,
    run: usize,
    seed: u64,
) -> Result<RunRecord> {
    let network = scenario.network();
    let b = network.simulate(&scenario.theta_true, seed)?;
    let cfg = McmcConfig {
        seed,
        ..config.clone()
    };
    let outcome = match mcmc::estimate(&network, &scenario.prior, &b, &cfg) {
        Ok(result) => {
            let (x, y) = (result.estimate[0], result.estimate[1]);
            let error = (x - scenario.theta_true[0]).hypot(y - scenario.theta_true[1]);
            Some(RunEstimate {
                x,
                y,
                error,
                acceptance_rate: result.acceptance_rate,
            })
        }
        Err(Error::InitializationFailed { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(RunRecord { run, seed, outcome })
}

/// `n_runs` independent simulate-and-estimate runs; run `l` uses seed
/// `base_seed + l`. Returns the RMS of the Euclidean error over the runs
/// that initialized successfully.
pub fn monte_carlo_rms(
    scenario: &Scenario,
    config: &McmcConfig,
    n_runs: usize,
    base_seed: u64,
) -> Result<MonteCarloSummary> {
    if n_runs == 0 {
        return Err(Error::invalid("runs", "need at least one run"));
    }
    config.validate()?;
    let records = (0..n_runs)
        .into_par_iter()
        .map(|run| single_run(scenario, config, run, base_seed.wrapping_add(run as u64)))
        .collect::<Result<Vec<_>>>()?;
    let errors: Vec<f64> = records
        .iter()
        .filter_map(|r| r.outcome.map(|o| o.error))
        .collect();
    let rms = if errors.is_empty() {
        f64::NAN
    } else {
        (errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64).sqrt()
    };
    Ok(MonteCarloSummary { rms, records })
}

/// Theoretical bound and empirical RMS for the three nested placements.
/// `base` supplies everything except the sensors.
pub fn reproduce_table1(
    base: &Scenario,
    config: &McmcConfig,
    n_runs: usize,
    base_seed: u64,
) -> Result<Vec<Table1Row>> {
    (1..=3)
        .map(|placement| {
            let sensors = grid_placement(&PlacementSpec::table1(placement)?)?;
            let scenario = base.with_sensors(sensors)?;
            let summary = monte_carlo_rms(&scenario, config, n_runs, base_seed)?;
            Ok(Table1Row {
                placement,
                sensors: scenario.sensors.len(),
                sigma_crb: scenario.sigma_crb()?,
                rms_error: summary.rms,
                n_runs,
                failures: summary.failures(),
            })
        })
        .collect()
}

/// Reference scenario at [`TABLE1_TAU`] with placement 1 sensors.
pub fn table1_base() -> Result<Scenario> {
    Scenario::reference(grid_placement(&PlacementSpec::table1(1)?)?)?.with_tau(TABLE1_TAU)
}

/// Shortest representation that round-trips to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_sweep_csv<W: Write>(mut w: W, records: &[SweepRecord]) -> Result<()> {
    writeln!(w, "tau,sigma_crb_binary,sigma_crb_analog,sigma_prior")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{}",
            fmt_f64(r.tau),
            fmt_f64(r.sigma_crb_binary),
            fmt_f64(r.sigma_crb_analog),
            fmt_f64(r.sigma_prior)
        )?;
    }
    Ok(())
}

/// Failed runs are written with `NaN` estimate columns.
pub fn write_runs_csv<W: Write>(mut w: W, records: &[RunRecord]) -> Result<()> {
    writeln!(w, "run,seed,est_x,est_y,error,acceptance_rate")?;
    for r in records {
        let o = r.outcome.unwrap_or(RunEstimate {
            x: f64::NAN,
            y: f64::NAN,
            error: f64::NAN,
            acceptance_rate: f64::NAN,
        });
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.run,
            r.seed,
            fmt_f64(o.x),
            fmt_f64(o.y),
            fmt_f64(o.error),
            fmt_f64(o.acceptance_rate)
        )?;
    }
    Ok(())
}

pub fn write_table1_csv<W: Write>(mut w: W, rows: &[Table1Row]) -> Result<()> {
    writeln!(w, "placement,S,sigma_crb,rms_error,n_runs")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.placement,
            r.sensors,
            fmt_f64(r.sigma_crb),
            fmt_f64(r.rms_error),
            r.n_runs
        )?;
    }
    Ok(())
}
