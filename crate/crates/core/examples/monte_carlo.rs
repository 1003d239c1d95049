//! Repeated simulate-and-estimate runs for the three nested grids,
//! comparing the RMS error with the bound. Shorter chains than the
//! default keep it quick; pass the run count as the first argument.

use binary_crb::experiment::{reproduce_table1, table1_base, write_table1_csv};
use binary_crb::mcmc::McmcConfig;

fn main() -> binary_crb::Result<()> {
    let runs: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(40);
    let config = McmcConfig::default().with_samples(2_000);
    let rows = reproduce_table1(&table1_base()?, &config, runs, 0)?;
    for r in &rows {
        println!(
            "placement {} (S={:>2}): bound {:>7.3} m   rms {:>7.3} m   failed runs {}",
            r.placement, r.sensors, r.sigma_crb, r.rms_error, r.failures
        );
    }
    println!();
    write_table1_csv(std::io::stdout().lock(), &rows)
}
