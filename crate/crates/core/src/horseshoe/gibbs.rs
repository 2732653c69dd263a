use crate::error::{Error, Result};
use crate::model::ObservationVector;
use crate::rng::{derive_key, inverse_gamma, std_normal, StreamRng};
use crate::Real;

use super::{mmle_xi, GibbsConfig, PosteriorSummary, SigmaMode, XiMode};

/// Lower bound applied to η², ξ² and σ² after every draw.
pub const SCALE_FLOOR: f64 = 1e-12;

// Substream tag for the global (ξ, ζ, σ²) updates of a sweep; coordinate
// substreams use tags (sweep, j) with j < m.
const GLOBAL_TAG: u64 = u64::MAX;

/// Latent state of one horseshoe chain.
#[derive(Debug, Clone, PartialEq)]
pub struct HorseshoeChainState<T> {
    pub beta: Vec<T>,
    pub eta_sq: Vec<T>,
    pub nu: Vec<T>,
    pub xi_sq: T,
    pub zeta: T,
    pub sigma_sq: T,
}

impl<T: Real> HorseshoeChainState<T> {
    /// Starts at β = y with unit local scales and auxiliaries.
    pub fn initial(y: &[T], xi_sq: T, sigma_sq: T) -> Self {
        let m = y.len();
        Self {
            beta: y.to_vec(),
            eta_sq: vec![T::one(); m],
            nu: vec![T::one(); m],
            xi_sq,
            zeta: T::one(),
            sigma_sq,
        }
    }

    pub fn kappa(&self, j: usize) -> T {
        self.sigma_sq / (self.sigma_sq + self.xi_sq * self.eta_sq[j])
    }

    /// One full sweep of block conditionals.
    pub fn sweep(&mut self, y: &[T], key: u64, sweep: usize, update_xi: bool, update_sigma: bool) -> Result<()> {
        let floor = T::lit(SCALE_FLOOR);
        let half = T::lit(0.5);
        let (xi_sq, sigma_sq) = (self.xi_sq, self.sigma_sq);
        for (j, &yj) in y.iter().enumerate() {
            let mut rng = StreamRng::new(key, &[sweep as u64, j as u64]);
            let prior_var = xi_sq * self.eta_sq[j];
            let denom = prior_var + sigma_sq;
            let mean = yj * prior_var / denom;
            let sd = (sigma_sq * prior_var / denom).sqrt();
            let beta = mean + sd * std_normal::<T, _>(&mut rng);
            let eta_sq = inverse_gamma(T::one(), T::one() / self.nu[j] + beta * beta * half / xi_sq, &mut rng).max(floor);
            let nu = inverse_gamma(T::one(), T::one() + T::one() / eta_sq, &mut rng);
            if !(beta.is_finite() && eta_sq.is_finite() && nu.is_finite() && nu > T::zero()) {
                return Err(Error::Sampler { sweep, what: "local update" });
            }
            self.beta[j] = beta;
            self.eta_sq[j] = eta_sq;
            self.nu[j] = nu;
        }

        if !(update_xi || update_sigma) {
            return Ok(());
        }
        let mut rng = StreamRng::new(key, &[sweep as u64, GLOBAL_TAG]);
        let m = T::count(y.len());
        if update_xi {
            let ss: T = self.beta.iter().zip(&self.eta_sq).map(|(&b, &e)| b * b / e).sum();
            self.xi_sq = inverse_gamma((m + T::one()) * half, T::one() / self.zeta + ss * half, &mut rng).max(floor);
            self.zeta = inverse_gamma(T::one(), T::one() + T::one() / self.xi_sq, &mut rng);
            if !(self.xi_sq.is_finite() && self.zeta.is_finite() && self.zeta > T::zero()) {
                return Err(Error::Sampler { sweep, what: "global scale update" });
            }
        }
        if update_sigma {
            let rss: T = y.iter().zip(&self.beta).map(|(&yj, &b)| (yj - b) * (yj - b)).sum();
            self.sigma_sq = inverse_gamma(m * half, rss * half, &mut rng).max(floor);
            if !self.sigma_sq.is_finite() {
                return Err(Error::Sampler { sweep, what: "noise variance update" });
            }
        }
        Ok(())
    }
}

/// Runs `burn_in + samples` sweeps and averages the retained draws.
pub fn gibbs_run<T: Real>(y: &ObservationVector<T>, config: &GibbsConfig<T>) -> Result<PosteriorSummary<T>> {
    config.validate()?;
    let values = y.values();
    let m = values.len();
    let (xi, update_xi) = match config.xi_mode {
        XiMode::Fixed(xi) => (xi, false),
        XiMode::Mmle => (mmle_xi(y)?, false),
        XiMode::FullBayes => (T::one(), true),
    };
    let (sigma_sq, update_sigma) = match config.sigma_mode {
        SigmaMode::Fixed(s) => (s, false),
        SigmaMode::Jeffreys => (T::one(), true),
    };

    let key = derive_key(config.seed, &[0x6873]);
    let mut state = HorseshoeChainState::initial(values, xi * xi, sigma_sq);
    let mut beta_sum = vec![T::zero(); m];
    let mut kappa_sum = vec![T::zero(); m];
    let (mut xi_sum, mut sigma_sum) = (T::zero(), T::zero());

    for sweep in 0..config.burn_in + config.samples {
        state.sweep(values, key, sweep, update_xi, update_sigma)?;
        if sweep < config.burn_in {
            continue;
        }
        for j in 0..m {
            beta_sum[j] = beta_sum[j] + state.beta[j];
            kappa_sum[j] = kappa_sum[j] + state.kappa(j);
        }
        if update_xi {
            xi_sum = xi_sum + state.xi_sq.sqrt();
        }
        sigma_sum = sigma_sum + state.sigma_sq;
    }

    let n = T::count(config.samples);
    let xi_mean = if update_xi { xi_sum / n } else { xi };
    log::debug!(
        "horseshoe chain: m={m} sweeps={} xi_mean={}",
        config.burn_in + config.samples,
        xi_mean
    );
    Ok(PosteriorSummary {
        beta_mean: beta_sum.into_iter().map(|b| b / n).collect(),
        kappa_mean: kappa_sum.into_iter().map(|k| (k / n).min(T::one())).collect(),
        xi_mean,
        sigma_sq_mean: sigma_sum / n,
    })
}
