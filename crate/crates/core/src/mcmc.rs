//! Random-walk Metropolis-Hastings estimation of the source parameters from
//! one binary measurement vector.
//!
//! The chain targets `p(b | theta) pi(theta)`. It is started from the most
//! likely of `n_init` prior draws whose likelihood clears
//! [`INIT_LIKELIHOOD_FLOOR`], proposes Gaussian steps with the posterior
//! CRB as covariance, and reports the mean of its last `n_keep` states.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::crb::{data_information_matrix, posterior_crb, prior_information, GaussianPrior};
use crate::error::{Error, Result};
use crate::model::{ForwardModel, ThetaVector};
use crate::observation::{BinaryMeasurements, BinaryNetwork};

/// Likelihood a prior draw must exceed to seed the chain. The likelihood
/// of a binary vector is at most 1, so this is relative to that ceiling.
pub const INIT_LIKELIHOOD_FLOOR: f64 = 1e-30;

/// Proposal scale, as a fraction of the prior covariance, used when the
/// data carry no usable information.
pub const FALLBACK_PROPOSAL_FRACTION: f64 = 0.01;

// Stream 0 is left to measurement simulation so one seed can drive both.
const INIT_STREAM: u64 = 2;
const CHAIN_STREAM: u64 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct McmcConfig {
    /// Qualifying prior draws collected before picking the start (`n_s`).
    pub n_init: usize,
    /// Trailing states averaged into the estimate (`n_m`).
    pub n_keep: usize,
    /// Total chain length including burn-in.
    pub n_total: usize,
    /// Maximum number of prior draws spent on initialization.
    pub init_budget: usize,
    /// Random-walk covariance. `None` selects the posterior CRB at the
    /// prior mean.
    pub proposal_cov: Option<DMatrix<f64>>,
    pub seed: u64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            n_init: 10,
            n_keep: 10_000,
            n_total: 20_000,
            init_budget: 1_000_000,
            proposal_cov: None,
            seed: 0,
        }
    }
}

impl McmcConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Keep `n_keep` samples after an equal-length burn-in.
    pub fn with_samples(mut self, n_keep: usize) -> Self {
        self.n_keep = n_keep;
        self.n_total = 2 * n_keep;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_init == 0 {
            return Err(Error::invalid("mcmc.n_s", "must be >= 1"));
        }
        if self.n_keep == 0 || self.n_total < self.n_keep {
            return Err(Error::invalid("mcmc.n_m", "need n_total >= n_m >= 1"));
        }
        if self.init_budget < self.n_init {
            return Err(Error::invalid("mcmc.init_budget", "must be >= n_s"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainResult {
    pub estimate: ThetaVector,
    pub samples_kept: usize,
    pub acceptance_rate: f64,
    /// Sample covariance of the kept states.
    pub sample_covariance: DMatrix<f64>,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Pick the chain's starting point from prior draws.
pub fn initialize<M: ForwardModel>(
    network: &BinaryNetwork<M>,
    prior: &GaussianPrior,
    b: &BinaryMeasurements,
    config: &McmcConfig,
) -> Result<ThetaVector> {
    config.validate()?;
    let mut rng = rng_for(config.seed, INIT_STREAM);
    let floor = INIT_LIKELIHOOD_FLOOR.ln();
    let mut best: Option<(f64, ThetaVector)> = None;
    let mut found = 0;
    for _ in 0..config.init_budget {
        let candidate = prior.sample(&mut rng);
        let Some(ll) = network.log_likelihood_above(b, &candidate, floor)? else {
            continue;
        };
        found += 1;
        if best.as_ref().is_none_or(|(top, _)| ll > *top) {
            best = Some((ll, candidate));
        }
        if found == config.n_init {
            break;
        }
    }
    match best {
        Some((_, theta)) if found == config.n_init => Ok(theta),
        _ => Err(Error::InitializationFailed {
            found,
            needed: config.n_init,
            budget: config.init_budget,
        }),
    }
}

/// Default random-walk covariance: the posterior CRB at the prior mean, or
/// a fraction of the prior covariance when the measurements are all equal
/// or the data information vanishes.
pub fn default_proposal_covariance<M: ForwardModel>(
    network: &BinaryNetwork<M>,
    prior: &GaussianPrior,
    b: &BinaryMeasurements,
) -> Result<DMatrix<f64>> {
    let fallback = prior.covariance() * FALLBACK_PROPOSAL_FRACTION;
    let ones = b.count_ones();
    if ones == 0 || ones == b.len() {
        return Ok(fallback);
    }
    let jd = data_information_matrix(network, prior.mean())?;
    let jp = prior_information(prior);
    if jd.matrix().trace() <= 1e-12 * jp.matrix().trace() {
        return Ok(fallback);
    }
    Ok(posterior_crb(&jd, &jp).unwrap_or(fallback))
}

/// Factor `L` with `L L^T = cov` for a PSD matrix.
/// Falls back to an eigen decomposition when Cholesky fails (singular or
/// zero covariance).
fn proposal_factor(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !cov.is_square() {
        return Err(Error::invalid("proposal_cov", "must be square"));
    }
    if let Some(chol) = cov.clone().cholesky() {
        return Ok(chol.l());
    }
    let eig = cov.clone().symmetric_eigen();
    if eig
        .eigenvalues
        .iter()
        .any(|&l| l < -1e-12 * cov.norm().max(1e-300))
    {
        return Err(Error::invalid(
            "proposal_cov",
            "must be positive semidefinite",
        ));
    }
    let sqrt = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&sqrt))
}

/// Run the Metropolis-Hastings chain from `start`.
pub fn run_chain<M: ForwardModel>(
    network: &BinaryNetwork<M>,
    prior: &GaussianPrior,
    b: &BinaryMeasurements,
    config: &McmcConfig,
    start: &ThetaVector,
) -> Result<ChainResult> {
    config.validate()?;
    let dim = start.dim();
    if prior.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: prior.dim(),
            actual: dim,
        });
    }
    let cov = match &config.proposal_cov {
        Some(c) => c.clone(),
        None => default_proposal_covariance(network, prior, b)?,
    };
    if cov.nrows() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: cov.nrows(),
        });
    }
    let factor = proposal_factor(&cov)?;
    let mut rng = rng_for(config.seed, CHAIN_STREAM);

    let log_target = |theta: &ThetaVector| -> Result<f64> {
        Ok(network.log_likelihood(b, theta)? + prior.log_density(theta))
    };

    let mut current = DVector::from_column_slice(start.values());
    let mut current_lp = log_target(start)?;
    let burn_in = config.n_total - config.n_keep;
    let mut accepted = 0usize;
    let mut sum = DVector::zeros(dim);
    let mut sum_outer = DMatrix::zeros(dim, dim);

    for step in 0..config.n_total {
        let z = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let proposal = &current + &factor * z;
        let theta = ThetaVector::new(proposal.iter().copied().collect())?;
        let lp = log_target(&theta)?;
        let u: f64 = rng.random();
        if u.ln() < lp - current_lp {
            current = proposal;
            current_lp = lp;
            accepted += 1;
        }
        if step >= burn_in {
            sum += &current;
            sum_outer += &current * current.transpose();
        }
    }

    let n = config.n_keep as f64;
    let mean = sum / n;
    let sample_covariance = if config.n_keep > 1 {
        (sum_outer / n - &mean * mean.transpose()) * (n / (n - 1.0))
    } else {
        DMatrix::zeros(dim, dim)
    };
    Ok(ChainResult {
        estimate: ThetaVector::new(mean.iter().copied().collect())?,
        samples_kept: config.n_keep,
        acceptance_rate: accepted as f64 / config.n_total as f64,
        sample_covariance,
    })
}

/// [`initialize`] followed by [`run_chain`].
pub fn estimate<M: ForwardModel>(
    network: &BinaryNetwork<M>,
    prior: &GaussianPrior,
    b: &BinaryMeasurements,
    config: &McmcConfig,
) -> Result<ChainResult> {
    let start = initialize(network, prior, b, config)?;
    run_chain(network, prior, b, config, &start)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{MeasurementModel, PlumeEnvironment, SensorLocation};
    use crate::observation::{NoiseModel, Threshold};

    fn plume_network(tau: f64) -> BinaryNetwork<MeasurementModel> {
        let env = PlumeEnvironment::new(5.0, 5.0, 3.5, 0.5, 0.2).unwrap();
        let mut sensors = Vec::new();
        for x in [40.0, 100.0, 160.0, 220.0] {
            for y in [-20.0, 0.0, 20.0, 40.0] {
                sensors.push(SensorLocation::ground(x, y));
            }
        }
        BinaryNetwork::new(
            MeasurementModel::GaussianPlume(env),
            sensors,
            NoiseModel::new(1e-4).unwrap(),
            Threshold::new(tau).unwrap(),
        )
        .unwrap()
    }

    fn prior(std: f64) -> GaussianPrior {
        GaussianPrior::from_std(ThetaVector::xy(10.0, 15.0).unwrap(), &[std, std]).unwrap()
    }

    #[test]
    fn point_mass_prior_initializes_at_truth() {
        let net = plume_network(1.8e-3);
        let truth = ThetaVector::xy(10.0, 15.0).unwrap();
        let b = net.simulate(&truth, 3).unwrap();
        let cfg = McmcConfig {
            n_init: 1,
            ..McmcConfig::default()
        };
        let start = initialize(&net, &prior(1e-15), &b, &cfg).unwrap();
        assert!((start[0] - 10.0).abs() < 1e-12 && (start[1] - 15.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_data_accepts_any_draw() {
        let net = plume_network(1e3);
        let b = BinaryMeasurements::new(vec![false; net.len()]).unwrap();
        let cfg = McmcConfig {
            n_init: 10,
            init_budget: 10,
            ..McmcConfig::default()
        };
        assert!(initialize(&net, &prior(500.0), &b, &cfg).is_ok());
    }

    #[test]
    fn impossible_data_exhausts_budget() {
        let net = plume_network(1e3);
        let b = BinaryMeasurements::new(vec![true; net.len()]).unwrap();
        let cfg = McmcConfig {
            init_budget: 1000,
            ..McmcConfig::default()
        };
        assert!(matches!(
            initialize(&net, &prior(500.0), &b, &cfg),
            Err(Error::InitializationFailed {
                found: 0,
                needed: 10,
                budget: 1000
            })
        ));
    }

    #[test]
    fn zero_proposal_never_moves() {
        let net = plume_network(1.8e-3);
        let truth = ThetaVector::xy(10.0, 15.0).unwrap();
        let b = net.simulate(&truth, 1).unwrap();
        let start = ThetaVector::xy(12.5, 14.0).unwrap();
        let cfg = McmcConfig {
            proposal_cov: Some(DMatrix::zeros(2, 2)),
            ..McmcConfig::default().with_samples(500)
        };
        let r = run_chain(&net, &prior(500.0), &b, &cfg, &start).unwrap();
        assert_eq!(r.estimate, start);
    }

    #[test]
    fn chain_is_deterministic() {
        let net = plume_network(1.8e-3);
        let truth = ThetaVector::xy(10.0, 15.0).unwrap();
        let b = net.simulate(&truth, 11).unwrap();
        let cfg = McmcConfig::default().with_samples(2000).with_seed(5);
        let a = estimate(&net, &prior(500.0), &b, &cfg).unwrap();
        let c = estimate(&net, &prior(500.0), &b, &cfg).unwrap();
        assert_eq!(a, c);
        assert!(a.acceptance_rate > 0.0 && a.acceptance_rate < 1.0);
    }

    #[test]
    fn flat_likelihood_samples_the_prior() {
        // Threshold far above every concentration: all bits are zero and the
        // likelihood is identically one, so the chain targets the prior.
        let net = plume_network(1e3);
        let b = BinaryMeasurements::new(vec![false; net.len()]).unwrap();
        let p = prior(500.0);
        let cfg = McmcConfig {
            proposal_cov: Some(p.covariance()),
            ..McmcConfig::default().with_samples(10_000).with_seed(9)
        };
        let r = run_chain(&net, &p, &b, &cfg, p.mean()).unwrap();
        // Random-walk chains are autocorrelated; a conservative effective
        // sample size of n/10 keeps the check meaningful.
        let n_eff = 1_000.0;
        for m in 0..2 {
            assert!((r.estimate[m] - p.mean()[m]).abs() < 3.0 * 500.0 / f64::sqrt(n_eff));
            let rel = r.sample_covariance[(m, m)] / p.variances()[m];
            assert!((rel - 1.0).abs() < 0.2, "variance ratio {rel}");
        }
    }

    #[test]
    fn default_proposal_falls_back_on_constant_bits() {
        let net = plume_network(1.8e-3);
        let p = prior(500.0);
        let zeros = BinaryMeasurements::new(vec![false; net.len()]).unwrap();
        let cov = default_proposal_covariance(&net, &p, &zeros).unwrap();
        assert_eq!(cov, p.covariance() * FALLBACK_PROPOSAL_FRACTION);
        let mixed = net
            .simulate(&ThetaVector::xy(10.0, 15.0).unwrap(), 2)
            .unwrap();
        assert!(mixed.count_ones() > 0 && mixed.count_ones() < net.len());
        let crb = default_proposal_covariance(&net, &p, &mixed).unwrap();
        assert!(crb.trace() < 0.01 * p.covariance().trace());
    }

    #[test]
    fn config_validation() {
        assert!(McmcConfig {
            n_init: 0,
            ..McmcConfig::default()
        }
        .validate()
        .is_err());
        assert!(McmcConfig {
            n_total: 5,
            ..McmcConfig::default()
        }
        .validate()
        .is_err());
        assert!(McmcConfig::default().validate().is_ok());
    }
}
