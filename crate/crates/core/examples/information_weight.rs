//! The per-sensor information weight of a binary sensor relative to its
//! analog counterpart, as a function of the threshold offset.

use binary_crb::observation::NoiseModel;

fn main() -> binary_crb::Result<()> {
    let sigma = 1e-4;
    let noise = NoiseModel::new(sigma)?;
    let analog = 1.0 / (sigma * sigma);
    println!("u/sigma   rho(u)          rho/analog");
    for k in -12..=12 {
        let u = 0.5 * k as f64 * sigma;
        let r = noise.rho(u);
        println!("{:>6.1}   {r:<14.6e}  {:.6}", u / sigma, r / analog);
    }
    println!("peak ratio 2/pi = {:.6}", 2.0 / std::f64::consts::PI);
    Ok(())
}
