//! Bound for a received-signal-strength network, where the unknowns are
//! the emitter position and its reference power.

use binary_crb::crb::{
    data_information_matrix, localization_sigma, posterior_crb, prior_information, GaussianPrior,
};
use binary_crb::model::{MeasurementModel, SensorLocation, ThetaVector};
use binary_crb::observation::{BinaryNetwork, NoiseModel, Threshold};

fn main() -> binary_crb::Result<()> {
    let theta = ThetaVector::new(vec![12.0, -7.0, -40.0])?;
    let sensors: Vec<_> = (0..5)
        .flat_map(|i| {
            (0..5).map(move |j| {
                SensorLocation::ground(-40.0 + 20.0 * i as f64, -40.0 + 20.0 * j as f64)
            })
        })
        .collect();
    let prior = GaussianPrior::from_std(theta.clone(), &[50.0, 50.0, 5.0])?;
    let jp = prior_information(&prior);
    let noise = NoiseModel::new(2.0)?;
    println!("tau (dB)  sigma_loc (m)  sd(Q0) (dB)");
    for tau in [-90.0, -80.0, -75.0, -70.0, -65.0, -60.0, -50.0] {
        let net = BinaryNetwork::new(
            MeasurementModel::rss(1.0)?,
            sensors.clone(),
            noise,
            Threshold::new(tau)?,
        )?;
        let crb = posterior_crb(&data_information_matrix(&net, &theta)?, &jp)?;
        let position = crb.view((0, 0), (2, 2)).into_owned();
        println!(
            "{tau:>8}  {:>13.3}  {:>11.3}",
            localization_sigma(&position)?,
            crb[(2, 2)].sqrt()
        );
    }
    Ok(())
}
