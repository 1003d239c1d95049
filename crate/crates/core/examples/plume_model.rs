//! Concentration and analytic gradient of the Gaussian plume along a
//! downwind transect, with a finite-difference cross-check.

use binary_crb::model::{
    finite_difference_gradient, ForwardModel, MeasurementModel, PlumeEnvironment, SensorLocation,
    ThetaVector, DEFAULT_FD_STEP,
};

fn main() -> binary_crb::Result<()> {
    let env = PlumeEnvironment::new(5.0, 5.0, 3.5, 0.5, 0.2)?;
    let model = MeasurementModel::plume(env)?;
    let source = ThetaVector::xy(10.0, 15.0)?;

    println!(
        "{:>6} {:>6} {:>14} {:>14} {:>14} {:>10}",
        "x", "y", "C", "dC/dx0", "dC/dy0", "fd err"
    );
    for x in [0.0, 20.0, 40.0, 100.0, 160.0, 220.0] {
        for y in [0.0, 15.0, 40.0] {
            let s = SensorLocation::ground(x, y);
            let c = model.concentration(&source, &s)?;
            let g = model.gradient(&source, &s)?;
            let err = if c > 0.0 {
                let fd = finite_difference_gradient(&model, &source, &s, DEFAULT_FD_STEP)?;
                binary_crb::validate::vector_relative_error(&g, &fd)
            } else {
                0.0
            };
            println!(
                "{x:>6} {y:>6} {c:>14.6e} {:>14.6e} {:>14.6e} {err:>10.1e}",
                g[0], g[1]
            );
        }
    }
    Ok(())
}
