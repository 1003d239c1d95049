//! Posterior bound for three nested sensor grids at a fixed threshold.

use binary_crb::experiment::table1_base;
use binary_crb::scenario::{grid_placement, PlacementSpec};

fn main() -> binary_crb::Result<()> {
    let base = table1_base()?;
    println!("placement  S   sigma_crb (m)  analog (m)  prior (m)");
    for p in 1..=3 {
        let s = base.with_sensors(grid_placement(&PlacementSpec::table1(p)?)?)?;
        println!(
            "{p:>9} {:>3} {:>14.4} {:>11.4} {:>10.2}",
            s.sensors.len(),
            s.sigma_crb()?,
            s.sigma_analog()?,
            s.sigma_prior()
        );
        let crb = s.posterior_crb()?;
        println!(
            "           crb = [[{:.4}, {:.4}], [{:.4}, {:.4}]]",
            crb[(0, 0)],
            crb[(0, 1)],
            crb[(1, 0)],
            crb[(1, 1)]
        );
    }
    Ok(())
}
