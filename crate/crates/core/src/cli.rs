//! Command-line front end. The binary is a thin wrapper around [`run`].

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::experiment::{
    default_tau_grid, fmt_f64, monte_carlo_rms, reproduce_table1, table1_base, tau_grid,
    threshold_sweep, write_runs_csv, write_sweep_csv, write_table1_csv, TABLE1_RUNS,
};
use crate::mcmc;
use crate::scenario::{Scenario, ScenarioConfig};
use crate::validate;

pub const EXIT_OK: i32 = 0;
/// Bad arguments, unreadable or malformed config.
pub const EXIT_CONFIG: i32 = 2;
/// Failure while computing or writing results.
pub const EXIT_RUNTIME: i32 = 3;
/// `validate` found a failing oracle check.
pub const EXIT_VALIDATION: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "binary-crb",
    version,
    about = "Posterior CRB and MCMC verification for binary sensor networks"
)]
pub struct Cli {
    /// Worker threads (default: all available cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Scenario config file.
    #[arg(long)]
    pub config: PathBuf,

    /// Override a config entry, e.g. `--set threshold.tau=0.002`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the posterior CRB and localization bound.
    Crb {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Localization bound as a function of the threshold (CSV).
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, requires = "tau_max")]
        tau_min: Option<f64>,
        #[arg(long, requires = "tau_min")]
        tau_max: Option<f64>,
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Simulate one measurement vector and estimate the source.
    Mcmc {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Repeated simulate-and-estimate runs with RMS summary (CSV).
    Montecarlo {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = TABLE1_RUNS)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Bound and RMS error for the three nested placements (CSV).
    Table1 {
        /// Optional config overriding the reference parameters; its
        /// sensor layout is replaced by each placement.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = TABLE1_RUNS)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the built-in oracle checks.
    Validate,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } | Error::InvalidParameter { .. } => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn load(path: &Path, overrides: &[String]) -> Result<ScenarioConfig, Failure> {
    let mut cfg = ScenarioConfig::from_file(path)?;
    for o in overrides {
        cfg.apply_override(o)?;
    }
    Ok(cfg)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn finish(mut w: BufWriter<File>) -> Result<(), Failure> {
    w.flush().map_err(|e| Failure::Runtime(e.to_string()))
}

fn print_matrix(out: &mut impl Write, m: &nalgebra::DMatrix<f64>) -> std::io::Result<()> {
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| fmt_f64(m[(i, j)])).collect();
        writeln!(out, "  [{}]", row.join(", "))?;
    }
    Ok(())
}

fn cmd_crb(scenario: &Scenario, out: &mut impl Write) -> Result<(), Failure> {
    let crb = scenario.posterior_crb()?;
    let sigma = crate::crb::localization_sigma(&crb)?;
    let io = |e: std::io::Error| Failure::Runtime(e.to_string());
    writeln!(out, "sensors: {}", scenario.sensors.len()).map_err(io)?;
    writeln!(out, "tau: {}", fmt_f64(scenario.tau.value())).map_err(io)?;
    writeln!(out, "sigma_crb: {}", fmt_f64(sigma)).map_err(io)?;
    writeln!(
        out,
        "sigma_crb_analog: {}",
        fmt_f64(scenario.sigma_analog()?)
    )
    .map_err(io)?;
    writeln!(out, "sigma_prior: {}", fmt_f64(scenario.sigma_prior())).map_err(io)?;
    writeln!(out, "crb:").map_err(io)?;
    print_matrix(out, &crb).map_err(io)
}

fn dispatch(cli: Cli, out: &mut impl Write) -> Result<i32, Failure> {
    let io = |e: std::io::Error| Failure::Runtime(e.to_string());
    match cli.command {
        Command::Crb { scenario } => {
            let s = load(&scenario.config, &scenario.overrides)?.scenario()?;
            cmd_crb(&s, out)?;
        }
        Command::Sweep {
            scenario,
            output,
            tau_min,
            tau_max,
            points,
        } => {
            let s = load(&scenario.config, &scenario.overrides)?.scenario()?;
            let taus = match (tau_min, tau_max) {
                (Some(lo), Some(hi)) => {
                    tau_grid(lo, hi, points).map_err(|e| Failure::Config(e.to_string()))?
                }
                _ => default_tau_grid(),
            };
            let records = threshold_sweep(&s, &taus)?;
            let mut w = create(&output)?;
            write_sweep_csv(&mut w, &records)?;
            finish(w)?;
            let best = records
                .iter()
                .map(|r| r.sigma_crb_binary)
                .fold(f64::INFINITY, f64::min);
            writeln!(
                out,
                "{} thresholds written to {}; min sigma_crb {} (analog {}, prior {})",
                records.len(),
                output.display(),
                fmt_f64(best),
                fmt_f64(records[0].sigma_crb_analog),
                fmt_f64(records[0].sigma_prior)
            )
            .map_err(io)?;
        }
        Command::Mcmc { scenario, seed } => {
            let cfg = load(&scenario.config, &scenario.overrides)?;
            let s = cfg.scenario()?;
            let mcmc_cfg = cfg.mcmc()?.with_seed(seed);
            let network = s.network();
            let b = network.simulate(&s.theta_true, seed)?;
            let result = mcmc::estimate(&network, &s.prior, &b, &mcmc_cfg)?;
            let err =
                (result.estimate[0] - s.theta_true[0]).hypot(result.estimate[1] - s.theta_true[1]);
            writeln!(out, "detections: {}/{}", b.count_ones(), b.len()).map_err(io)?;
            writeln!(
                out,
                "estimate: {}, {}",
                fmt_f64(result.estimate[0]),
                fmt_f64(result.estimate[1])
            )
            .map_err(io)?;
            writeln!(out, "error: {}", fmt_f64(err)).map_err(io)?;
            writeln!(out, "acceptance_rate: {}", fmt_f64(result.acceptance_rate)).map_err(io)?;
            writeln!(out, "sigma_crb: {}", fmt_f64(s.sigma_crb()?)).map_err(io)?;
        }
        Command::Montecarlo {
            scenario,
            output,
            runs,
            seed,
        } => {
            let cfg = load(&scenario.config, &scenario.overrides)?;
            let s = cfg.scenario()?;
            let summary = monte_carlo_rms(&s, &cfg.mcmc()?, runs, seed)?;
            let mut w = create(&output)?;
            write_runs_csv(&mut w, &summary.records)?;
            finish(w)?;
            if summary.failures() > 0 {
                eprintln!(
                    "warning: {} of {} runs failed to initialize and were excluded",
                    summary.failures(),
                    runs
                );
            }
            writeln!(
                out,
                "rms_error: {} over {} runs (sigma_crb {})",
                fmt_f64(summary.rms),
                summary.successes(),
                fmt_f64(s.sigma_crb()?)
            )
            .map_err(io)?;
        }
        Command::Table1 {
            config,
            overrides,
            output,
            runs,
            seed,
        } => {
            let (base, mcmc_cfg) = match config {
                Some(path) => {
                    let cfg = load(&path, &overrides)?;
                    (cfg.scenario()?, cfg.mcmc()?)
                }
                None => {
                    if !overrides.is_empty() {
                        return Err(Failure::Config("--set requires --config".into()));
                    }
                    (table1_base()?, mcmc::McmcConfig::default())
                }
            };
            let rows = reproduce_table1(&base, &mcmc_cfg, runs, seed)?;
            let mut w = create(&output)?;
            write_table1_csv(&mut w, &rows)?;
            finish(w)?;
            for r in &rows {
                writeln!(
                    out,
                    "placement {} (S={}): sigma_crb {} rms {}{}",
                    r.placement,
                    r.sensors,
                    fmt_f64(r.sigma_crb),
                    fmt_f64(r.rms_error),
                    if r.failures > 0 {
                        format!(" ({} failed runs)", r.failures)
                    } else {
                        String::new()
                    }
                )
                .map_err(io)?;
            }
        }
        Command::Validate => {
            let report = validate::run_suite()?;
            write!(out, "{report}").map_err(io)?;
            return Ok(exit_code_for(&report));
        }
    }
    Ok(EXIT_OK)
}

/// Exit status for a validation report.
pub fn exit_code_for(report: &validate::ValidationReport) -> i32 {
    if report.all_passed() {
        EXIT_OK
    } else {
        EXIT_VALIDATION
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I, out: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    if let Some(n) = cli.threads {
        // A pool may already exist when called repeatedly in-process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            EXIT_CONFIG
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            EXIT_RUNTIME
        }
    }
}
