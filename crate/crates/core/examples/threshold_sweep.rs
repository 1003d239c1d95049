//! Localization bound versus threshold for a sparse and a dense grid.
//! Pass a directory to also write the two sweep CSVs there.

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use binary_crb::experiment::{default_tau_grid, threshold_sweep, write_sweep_csv};
use binary_crb::scenario::{grid_placement, PlacementSpec, Scenario};

fn main() -> binary_crb::Result<()> {
    let out_dir = std::env::args().nth(1).map(PathBuf::from);
    let taus = default_tau_grid();
    for (name, spec) in [
        ("sparse", PlacementSpec::sparse_field()),
        ("dense", PlacementSpec::dense_field()),
    ] {
        let scenario = Scenario::reference(grid_placement(&spec)?)?;
        let sweep = threshold_sweep(&scenario, &taus)?;
        let best = sweep
            .iter()
            .min_by(|a, b| a.sigma_crb_binary.total_cmp(&b.sigma_crb_binary))
            .expect("non-empty sweep");
        println!("{name} grid, S = {}", spec.len());
        println!("  tau -> -inf : {:.2} m", sweep[0].sigma_crb_binary);
        println!(
            "  tau -> +inf : {:.2} m",
            sweep[sweep.len() - 1].sigma_crb_binary
        );
        println!(
            "  best tau    : {:.3e} giving {:.4} m",
            best.tau, best.sigma_crb_binary
        );
        println!("  analog      : {:.4} m", best.sigma_crb_analog);
        if let Some(dir) = &out_dir {
            let path = dir.join(format!("sweep_{name}.csv"));
            write_sweep_csv(BufWriter::new(File::create(&path)?), &sweep)?;
            println!("  wrote {}", path.display());
        }
    }
    Ok(())
}
