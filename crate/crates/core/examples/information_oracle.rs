//! Closed-form information matrix against exact enumeration of all
//! outcomes and against a sampled average of score outer products.

use binary_crb::crb::{data_information_matrix, empirical_information_matrix, FimMode};
use binary_crb::model::MeasurementModel;
use binary_crb::validate::random_plume_network;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> binary_crb::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (network, theta) = random_plume_network(&MeasurementModel::GaussianPlume, 6, &mut rng)?;
    let closed = data_information_matrix(&network, &theta)?;
    let exact = empirical_information_matrix(&network, &theta, FimMode::Exact)?;
    let sampled = empirical_information_matrix(
        &network,
        &theta,
        FimMode::Sampled {
            n_samples: 100_000,
            seed: 1,
        },
    )?;
    let se = sampled
        .standard_error
        .as_ref()
        .expect("sampling mode reports errors");

    println!("entry   closed form      exact            sampled (+- se)");
    for i in 0..2 {
        for j in i..2 {
            println!(
                "({i},{j})   {:<15.8e}  {:<15.8e}  {:.6e} +- {:.1e}",
                closed.get(i, j),
                exact.matrix[(i, j)],
                sampled.matrix[(i, j)],
                se[(i, j)]
            );
        }
    }
    Ok(())
}
