//! Posterior Cramer-Rao bounds for locating a source with a network of
//! binary (thresholded) sensors.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: forward models `C_i(theta)` (Gaussian plume, RSS, constant)
//!   and their analytic gradients.
//! * [`observation`]: Gaussian noise, one-bit quantization, the Bernoulli
//!   likelihood and its score, measurement simulation and the information
//!   weight `rho`.
//! * [`crb`]: binary and analog data information matrices, Gaussian prior
//!   information and the posterior bound.
//! * [`mcmc`]: a Metropolis-Hastings estimator used to check the bound
//!   empirically.
//! * [`scenario`] and [`experiment`]: scenario configs, sensor layouts,
//!   threshold sweeps and Monte Carlo campaigns with CSV output.
//! * [`validate`]: oracle checks shared by the test-suite and the
//!   `binary-crb validate` command.
//!
//! ```
//! use binary_crb::scenario::{grid_placement, PlacementSpec, Scenario};
//!
//! let sensors = grid_placement(&PlacementSpec::table1(1)?)?;
//! let scenario = Scenario::reference(sensors)?;
//! let sigma = scenario.sigma_crb()?;
//! assert!(sigma > scenario.sigma_analog()? && sigma < scenario.sigma_prior());
//! # Ok::<(), binary_crb::Error>(())
//! ```

pub mod cli;
pub mod crb;
pub mod error;
pub mod experiment;
pub mod mcmc;
pub mod model;
pub mod observation;
pub mod scenario;
pub mod validate;

pub use error::{Error, Result};
