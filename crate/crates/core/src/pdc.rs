//! Prior-data conflict check for the horseshoe under equicorrelated noise.
//!
//! The sufficient statistic is the sample mean ȳ. Given one draw of the local
//! scales η and a plug-in ξ, its prior predictive law is
//! `N(0, σ_jj²ξ²Ση_j²/m² + (σ_jj² + (m−1)σ_jk²)/m)` and the check reports the
//! two-sided tail probability of the observed ȳ under that law.

use crate::error::{Error, Result};
use crate::model::ObservationVector;
use crate::rng::{half_cauchy, StreamRng};
use crate::special::normal_sf;
use crate::Real;

pub const DEFAULT_THRESHOLD: f64 = 0.05;
/// Number of local-scale draws in [`pdc_check_averaged`].
pub const DEFAULT_AVERAGED_DRAWS: usize = 100;

const LOCAL_SCALE_TAG: u64 = 0x7064_63;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdcResult<T> {
    pub ybar: T,
    pub predictive_sd: T,
    pub tail_probability: T,
    pub conflict: bool,
    pub threshold: T,
}

/// Covariance entries of the noise: unit diagonal and `√ρ` off-diagonal
/// reproduce an equicorrelated model with correlation ρ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseCovariance<T> {
    pub sigma_diag: T,
    pub sigma_offdiag: T,
}

impl<T: Real> NoiseCovariance<T> {
    pub fn equicorrelated(rho: T) -> Self {
        Self { sigma_diag: T::one(), sigma_offdiag: rho.sqrt() }
    }
}

pub fn prior_predictive_variance<T: Real>(xi: T, eta: &[T], cov: NoiseCovariance<T>, m: usize) -> Result<T> {
    if eta.len() != m {
        return Err(Error::Dimension { expected: m, found: eta.len() });
    }
    if m == 0 {
        return Err(Error::Domain("empty local-scale vector".into()));
    }
    let mm = T::count(m);
    let d2 = cov.sigma_diag * cov.sigma_diag;
    let eta_ss: T = eta.iter().map(|&e| e * e).sum();
    let prior = d2 * xi * xi * eta_ss / (mm * mm);
    let noise = (d2 + (mm - T::one()) * cov.sigma_offdiag * cov.sigma_offdiag) / mm;
    let v = prior + noise;
    if !(v > T::zero() && v.is_finite()) {
        return Err(Error::Domain(format!("prior predictive variance must be positive and finite, got {v}")));
    }
    Ok(v)
}

/// `2(1 − Φ(|ȳ|/sd))`.
pub fn pdc_tail_probability<T: Real>(ybar: T, predictive_sd: T) -> T {
    (T::lit(2.0) * normal_sf(ybar.abs() / predictive_sd)).min(T::one())
}

/// Standard half-Cauchy local scales for one seed.
pub fn draw_local_scales<T: Real>(m: usize, seed: u64) -> Vec<T> {
    let mut rng = StreamRng::new(seed, &[LOCAL_SCALE_TAG]);
    (0..m).map(|_| half_cauchy(&mut rng)).collect()
}

fn check_threshold<T: Real>(threshold: T) -> Result<()> {
    if !(threshold >= T::zero() && threshold < T::one()) {
        return Err(Error::Config(format!("threshold must lie in [0, 1), got {threshold}")));
    }
    Ok(())
}

/// Conflict check with one draw of the local scales.
pub fn pdc_check<T: Real>(
    y: &ObservationVector<T>,
    xi: T,
    cov: NoiseCovariance<T>,
    threshold: T,
    seed: u64,
) -> Result<PdcResult<T>> {
    check_threshold(threshold)?;
    let eta = draw_local_scales(y.len(), seed);
    let sd = prior_predictive_variance(xi, &eta, cov, y.len())?.sqrt();
    let ybar = y.mean();
    let tail = pdc_tail_probability(ybar, sd);
    Ok(PdcResult { ybar, predictive_sd: sd, tail_probability: tail, conflict: tail < threshold, threshold })
}

/// Extension: averages the tail probability over `draws` independent local
/// scale vectors. `predictive_sd` reports the root mean predictive variance.
pub fn pdc_check_averaged<T: Real>(
    y: &ObservationVector<T>,
    xi: T,
    cov: NoiseCovariance<T>,
    threshold: T,
    seed: u64,
    draws: usize,
) -> Result<PdcResult<T>> {
    check_threshold(threshold)?;
    if draws == 0 {
        return Err(Error::Config("averaged check needs at least one draw".into()));
    }
    let ybar = y.mean();
    let (mut tail_sum, mut var_sum) = (T::zero(), T::zero());
    for k in 0..draws {
        let eta = draw_local_scales(y.len(), crate::rng::derive_key(seed, &[k as u64]));
        let v = prior_predictive_variance(xi, &eta, cov, y.len())?;
        tail_sum = tail_sum + pdc_tail_probability(ybar, v.sqrt());
        var_sum = var_sum + v;
    }
    let n = T::count(draws);
    let tail = tail_sum / n;
    Ok(PdcResult { ybar, predictive_sd: (var_sum / n).sqrt(), tail_probability: tail, conflict: tail < threshold, threshold })
}
