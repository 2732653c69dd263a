//! Horseshoe prior for the normal means model.
//!
//! Hierarchy: `y_j ~ N(β_j, σ²)`, `β_j ~ N(0, ξ²η_j²)`, `η_j ~ C⁺(0, 1)`.
//! The global scale ξ is either held fixed, given its own half-Cauchy prior
//! (full Bayes) or set by maximum marginal likelihood before sampling.

mod gibbs;
mod marginal;

pub use gibbs::{gibbs_run, HorseshoeChainState, SCALE_FLOOR};
pub use marginal::{
    log_marginal_density, marginal_likelihood, mmle_xi, mmle_xi_with_grid, posterior_mean_quadrature,
    MMLE_GRID_POINTS,
};

use crate::error::{Error, Result};
use crate::model::{DecisionVector, ObservationVector};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XiMode<T> {
    Fixed(T),
    FullBayes,
    Mmle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaMode<T> {
    Fixed(T),
    Jeffreys,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibbsConfig<T> {
    pub burn_in: usize,
    pub samples: usize,
    pub seed: u64,
    pub xi_mode: XiMode<T>,
    pub sigma_mode: SigmaMode<T>,
}

pub const DEFAULT_BURN_IN: usize = 1_000;
pub const DEFAULT_SAMPLES: usize = 5_000;

impl<T: Real> GibbsConfig<T> {
    pub fn new(xi_mode: XiMode<T>, sigma_mode: SigmaMode<T>, seed: u64) -> Self {
        Self {
            burn_in: DEFAULT_BURN_IN,
            samples: DEFAULT_SAMPLES,
            seed,
            xi_mode,
            sigma_mode,
        }
    }

    pub fn with_length(mut self, burn_in: usize, samples: usize) -> Self {
        self.burn_in = burn_in;
        self.samples = samples;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Config("samples must be at least 1".into()));
        }
        if let XiMode::Fixed(xi) = self.xi_mode {
            if !(xi > T::zero() && xi.is_finite()) {
                return Err(Error::Config(format!("fixed xi must be positive, got {xi}")));
            }
        }
        if let SigmaMode::Fixed(s) = self.sigma_mode {
            if !(s > T::zero() && s.is_finite()) {
                return Err(Error::Config(format!("fixed sigma^2 must be positive, got {s}")));
            }
        }
        Ok(())
    }
}

/// Averages of the post-burn-in draws.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSummary<T> {
    pub beta_mean: Vec<T>,
    /// Mean shrinkage weight `σ²/(σ² + ξ²η_j²)`.
    pub kappa_mean: Vec<T>,
    pub xi_mean: T,
    pub sigma_sq_mean: T,
}

/// Rejects `j` when the posterior mean keeps more than half of `y_j`. An
/// observation exactly at zero is never rejected.
pub fn hs_decision<T: Real>(summary: &PosteriorSummary<T>, y: &ObservationVector<T>) -> Result<DecisionVector> {
    if summary.beta_mean.len() != y.len() {
        return Err(Error::Dimension { expected: y.len(), found: summary.beta_mean.len() });
    }
    let half = T::lit(0.5);
    Ok(DecisionVector::new(
        summary
            .beta_mean
            .iter()
            .zip(y.values())
            .map(|(b, &yj)| yj != T::zero() && b.abs() > yj.abs() * half)
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summary(beta: Vec<f64>) -> PosteriorSummary<f64> {
        let m = beta.len();
        PosteriorSummary { beta_mean: beta, kappa_mean: vec![0.5; m], xi_mean: 0.1, sigma_sq_mean: 1.0 }
    }

    #[test]
    fn decision_rule_examples() {
        let y = ObservationVector::new(vec![0.0, 1.0, -3.0, 5.0]).unwrap();
        let d = hs_decision(&summary(y.values().to_vec()), &y).unwrap();
        assert_eq!(d.reject(), &[false, true, true, true]);
        let d = hs_decision(&summary(vec![0.0; 4]), &y).unwrap();
        assert_eq!(d.rejections(), 0);
        let d = hs_decision(&summary(vec![0.0, 0.0, 0.0, 2.6]), &y).unwrap();
        assert_eq!(d.reject(), &[false, false, false, true]);
        let d = hs_decision(&summary(vec![0.0, 0.0, 0.0, 2.5]), &y).unwrap();
        assert_eq!(d.rejections(), 0);
        let d = hs_decision(&summary(vec![1e-3, 0.0, 0.0, 0.0]), &y).unwrap();
        assert_eq!(d.rejections(), 0);
    }

    #[test]
    fn decision_length_mismatch() {
        let y = ObservationVector::new(vec![1.0]).unwrap();
        assert!(matches!(hs_decision(&summary(vec![0.0, 1.0]), &y), Err(Error::Dimension { .. })));
    }

    #[test]
    fn config_validation() {
        let ok = GibbsConfig::new(XiMode::Fixed(0.1), SigmaMode::Jeffreys, 1);
        assert!(ok.validate().is_ok());
        assert!(GibbsConfig::new(XiMode::Fixed(0.0), SigmaMode::Jeffreys, 1).validate().is_err());
        assert!(GibbsConfig::new(XiMode::<f64>::Mmle, SigmaMode::Fixed(-1.0), 1).validate().is_err());
        assert!(ok.with_length(0, 0).validate().is_err());
    }
}
