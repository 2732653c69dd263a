//! Lindsey's method: Poisson regression of histogram counts on a natural
//! spline basis, fitted by iteratively reweighted least squares.

use super::spline::NaturalSplineBasis;
use super::MarginalDensity;
use crate::error::{Error, Result};
use crate::linalg::least_squares;
use crate::model::ObservationVector;
use crate::Real;

pub const DEFAULT_BINS: usize = 120;
pub const DEFAULT_DF: usize = 7;
pub const IRLS_MAX_ITER: usize = 50;
pub const IRLS_TOL: f64 = 1e-8;
const MAX_HALVINGS: usize = 30;

/// Fitted marginal density `f̂(z) = exp(x(z)'b) / (N Δ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LindseyDensity<T> {
    basis: NaturalSplineBasis<T>,
    coef: Vec<T>,
    log_norm: T,
    /// Histogram bin edges (bins + 1 entries).
    pub edges: Vec<T>,
    pub midpoints: Vec<T>,
    pub counts: Vec<usize>,
    pub iterations: usize,
    pub deviance: T,
}

impl<T: Real> LindseyDensity<T> {
    pub fn bin_width(&self) -> T {
        self.edges[1] - self.edges[0]
    }

    pub fn log_density(&self, z: T) -> T {
        let x = self.basis.eval(z);
        x.iter().zip(&self.coef).map(|(a, b)| *a * *b).sum::<T>() - self.log_norm
    }
}

impl<T: Real> MarginalDensity<T> for LindseyDensity<T> {
    fn density(&self, z: T) -> T {
        LindseyDensity::log_density(self, z).exp()
    }

    fn log_density(&self, z: T) -> T {
        LindseyDensity::log_density(self, z)
    }
}

fn histogram<T: Real>(z: &[T], bins: usize) -> Result<(Vec<T>, Vec<usize>)> {
    let lo = z.iter().copied().fold(T::infinity(), T::min);
    let hi = z.iter().copied().fold(T::neg_infinity(), T::max);
    if !(hi > lo) {
        return Err(Error::Fit {
            reason: "degenerate range: all observations are equal".into(),
            iterations: 0,
        });
    }
    let width = (hi - lo) / T::count(bins);
    let edges: Vec<T> = (0..=bins)
        .map(|k| if k == bins { hi } else { lo + width * T::count(k) })
        .collect();
    let mut counts = vec![0usize; bins];
    for &v in z {
        let k = ((v - lo) / width).floor().to_usize().unwrap_or(0).min(bins - 1);
        counts[k] += 1;
    }
    Ok((edges, counts))
}

fn poisson_deviance<T: Real>(y: &[T], mu: &[T]) -> T {
    let two = T::lit(2.0);
    y.iter()
        .zip(mu)
        .map(|(&yk, &mk)| {
            let log_term = if yk > T::zero() { yk * (yk / mk).ln() } else { T::zero() };
            two * (log_term - (yk - mk))
        })
        .sum()
}

/// Histograms `z` into `bins` equal-width bins over [min z, max z] and fits
/// log-linear counts on a natural spline with `df` degrees of freedom.
pub fn fit_lindsey<T: Real>(z: &ObservationVector<T>, bins: usize, df: usize) -> Result<LindseyDensity<T>> {
    if bins < 10 {
        return Err(Error::Config(format!("need at least 10 bins, got {bins}")));
    }
    if z.len() < bins {
        return Err(Error::Config(format!(
            "need at least as many observations as bins ({} < {bins})",
            z.len()
        )));
    }
    if df == 0 || df + 1 > bins {
        return Err(Error::Config(format!("spline df must lie in [1, bins - 1], got {df}")));
    }
    let (edges, counts) = histogram(z.values(), bins)?;
    let half = T::lit(0.5);
    let midpoints: Vec<T> = edges.windows(2).map(|w| (w[0] + w[1]) * half).collect();
    let basis = NaturalSplineBasis::from_quantiles(&midpoints, df);
    let p = basis.ncols();
    let mut design = Vec::with_capacity(bins * p);
    let mut row = Vec::with_capacity(p);
    for &x in &midpoints {
        basis.eval_into(x, &mut row);
        design.extend_from_slice(&row);
    }

    let y: Vec<T> = counts.iter().map(|&c| T::count(c)).collect();
    let mut mu: Vec<T> = y.iter().map(|&v| v + T::lit(0.1)).collect();
    let mut eta: Vec<T> = mu.iter().map(|m| m.ln()).collect();
    let mut deviance = poisson_deviance(&y, &mu);
    let mut coef = vec![T::zero(); p];
    let mut weighted = vec![T::zero(); bins * p];
    let mut rhs = vec![T::zero(); bins];
    let tol = T::lit(IRLS_TOL);

    let fitted = |coef: &[T], eta: &mut [T], mu: &mut [T]| {
        for k in 0..bins {
            eta[k] = (0..p).map(|c| design[k * p + c] * coef[c]).sum();
            mu[k] = eta[k].exp().max(T::epsilon());
        }
        poisson_deviance(&y, mu)
    };
    let finish = |coef: Vec<T>, iterations: usize, deviance: T| {
        let n = T::count(z.len());
        let width = edges[1] - edges[0];
        LindseyDensity {
            basis: basis.clone(),
            coef,
            log_norm: (n * width).ln(),
            edges: edges.clone(),
            midpoints: midpoints.clone(),
            counts: counts.clone(),
            iterations,
            deviance,
        }
    };

    for iter in 1..=IRLS_MAX_ITER {
        for k in 0..bins {
            let sw = mu[k].sqrt();
            let working = eta[k] + (y[k] - mu[k]) / mu[k];
            rhs[k] = sw * working;
            for c in 0..p {
                weighted[k * p + c] = sw * design[k * p + c];
            }
        }
        let prev = coef.clone();
        coef = least_squares(&weighted, bins, p, &rhs).ok_or_else(|| Error::Fit {
            reason: "singular weighted design".into(),
            iterations: iter,
        })?;
        let mut next = fitted(&coef, &mut eta, &mut mu);
        // Step-halving toward the previous iterate when the update overshoots,
        // which happens when isolated extreme bins push the fit toward a
        // boundary solution.
        let mut halvings = 0;
        while iter > 1 && (!next.is_finite() || next > deviance) && halvings < MAX_HALVINGS {
            for (c, &q) in coef.iter_mut().zip(&prev) {
                *c = (*c + q) * T::lit(0.5);
            }
            next = fitted(&coef, &mut eta, &mut mu);
            halvings += 1;
        }
        if !next.is_finite() {
            return Err(Error::Fit { reason: "non-finite deviance".into(), iterations: iter });
        }
        let change = (next - deviance).abs() / (next.abs() + T::lit(0.1));
        deviance = next;
        if change < tol {
            return Ok(finish(coef, iter, deviance));
        }
    }
    log::warn!("Lindsey fit stopped after {IRLS_MAX_ITER} IRLS iterations (deviance {deviance})");
    Ok(finish(coef, IRLS_MAX_ITER, deviance))
}

