//! Simulate one set of binary readings and localize the source with the
//! random-walk Metropolis-Hastings estimator.

use binary_crb::experiment::table1_base;
use binary_crb::mcmc::{self, McmcConfig};
use binary_crb::scenario::{grid_placement, PlacementSpec};

fn main() -> binary_crb::Result<()> {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    let scenario = table1_base()?.with_sensors(grid_placement(&PlacementSpec::table1(3)?)?)?;
    let network = scenario.network();
    let b = network.simulate(&scenario.theta_true, seed)?;

    let bits: String = b
        .bits()
        .iter()
        .map(|&x| if x { '1' } else { '0' })
        .collect();
    println!(
        "readings ({} of {} above threshold): {bits}",
        b.count_ones(),
        b.len()
    );

    let config = McmcConfig::default().with_seed(seed);
    let start = mcmc::initialize(&network, &scenario.prior, &b, &config)?;
    println!("start:    ({:.2}, {:.2})", start[0], start[1]);
    let result = mcmc::estimate(&network, &scenario.prior, &b, &config)?;
    let (x, y) = (result.estimate[0], result.estimate[1]);
    println!(
        "estimate: ({x:.2}, {y:.2}) from {} samples",
        result.samples_kept
    );
    println!(
        "truth:    ({:.2}, {:.2})",
        scenario.theta_true[0], scenario.theta_true[1]
    );
    println!(
        "error:    {:.3} m",
        (x - scenario.theta_true[0]).hypot(y - scenario.theta_true[1])
    );
    println!(
        "acceptance rate {:.3}, bound {:.3} m",
        result.acceptance_rate,
        scenario.sigma_crb()?
    );
    Ok(())
}
