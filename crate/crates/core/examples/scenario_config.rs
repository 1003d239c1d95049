//! Build a scenario from key-value text, apply overrides, and compute the
//! bound.

use binary_crb::scenario::ScenarioConfig;

const CONFIG: &str = "
[source]
x0 = 10
y0 = 15

[noise]
sigma = 1e-4

[threshold]
tau = 0.0018

[sensors]
x_coords = 40, 70, 100, 130, 160, 190, 220
y_coords = -20, 0, 20, 40
";

fn main() -> binary_crb::Result<()> {
    let mut cfg = ScenarioConfig::parse(CONFIG)?;
    let s = cfg.scenario()?;
    println!(
        "{} sensors, sigma_crb {:.4} m",
        s.sensors.len(),
        s.sigma_crb()?
    );
    for tau in ["0.0005", "0.001", "0.003", "1e6"] {
        cfg.apply_override(&format!("threshold.tau={tau}"))?;
        println!(
            "tau = {tau:<7} sigma_crb {:.4} m",
            cfg.scenario()?.sigma_crb()?
        );
    }
    match cfg.apply_override("noise.sigmaa=1") {
        Err(e) => println!("rejected: {e}"),
        Ok(()) => unreachable!(),
    }
    Ok(())
}
