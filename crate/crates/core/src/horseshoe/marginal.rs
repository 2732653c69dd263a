//! Marginal likelihood of the horseshoe with the local scale integrated out.
//!
//! With `t = ln η` the half-Cauchy density becomes `(2/π) e^t / (1 + e^{2t})`
//! and every integral below is over the real line in `t`. Integrands are
//! evaluated in log space relative to their maximum on a coarse scan, and the
//! range is trimmed to where they exceed `e^{-TRIM}` of that maximum.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::ObservationVector;
use crate::quadrature::{integrate, QuadOptions};
use crate::Real;

pub const MMLE_GRID_POINTS: usize = 200;

const SCAN_POINTS: usize = 32;
const TRIM: f64 = 46.0;
const QUAD: QuadOptions = QuadOptions { abs_tol: 0.0, rel_tol: 1e-8, initial_panels: 4, max_panels: 2_000 };

/// Log of `N(y; 0, σ² + ξ²e^{2t}) · (2/π) e^t / (1 + e^{2t})`.
#[inline]
fn log_integrand(t: f64, y: f64, xi_sq: f64, sigma_sq: f64) -> f64 {
    let v = sigma_sq + xi_sq * (2.0 * t).exp();
    let log_prior = (2.0 / PI).ln() + t - ln_1p_exp(2.0 * t);
    -0.5 * ((2.0 * PI * v).ln() + y * y / v) + log_prior
}

#[inline]
fn ln_1p_exp(x: f64) -> f64 {
    if x > 35.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

/// `exp(log_integrand(t) − shift)` without the intermediate logarithms.
#[inline]
fn scaled_integrand(t: f64, y: f64, xi_sq: f64, sigma_sq: f64, shift: f64) -> f64 {
    let et = t.exp();
    let e2t = et * et;
    if !e2t.is_finite() {
        return (log_integrand(t, y, xi_sq, sigma_sq) - shift).exp();
    }
    let v = sigma_sq + xi_sq * e2t;
    let c = 2.0 / (PI * (2.0 * PI).sqrt());
    (-0.5 * y * y / v - shift).exp() * c / v.sqrt() * et / (1.0 + e2t)
}

struct Window {
    lo: f64,
    hi: f64,
    shift: f64,
}

fn window(y: f64, xi_sq: f64, sigma_sq: f64) -> Window {
    let lo = -30.0;
    let hi = 30.0 + 0.5 * (sigma_sq / xi_sq).ln().max(0.0) + (1.0 + y.abs() / sigma_sq.sqrt()).ln();
    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let scan: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| log_integrand(lo + step * i as f64, y, xi_sq, sigma_sq))
        .collect();
    let (peak, shift) = scan
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (i, &g)| if g > b.1 { (i, g) } else { b });
    let first = scan[..peak].iter().rposition(|&g| g < shift - TRIM).unwrap_or(0);
    let last = scan[peak..].iter().position(|&g| g < shift - TRIM).map_or(SCAN_POINTS - 1, |k| peak + k);
    Window { lo: lo + step * first as f64, hi: lo + step * last as f64, shift }
}

fn check_inputs(y: f64, xi: f64, sigma_sq: f64) -> Result<()> {
    if !y.is_finite() || !(xi > 0.0 && xi.is_finite()) || !(sigma_sq > 0.0 && sigma_sq.is_finite()) {
        return Err(Error::Domain(format!("marginal density needs finite y, xi > 0, sigma^2 > 0 (y={y}, xi={xi}, sigma^2={sigma_sq})")));
    }
    Ok(())
}

/// `log m_ξ(y)` for a single observation with noise variance `sigma_sq`.
pub fn log_marginal_density(y: f64, xi: f64, sigma_sq: f64) -> Result<f64> {
    check_inputs(y, xi, sigma_sq)?;
    let xi_sq = xi * xi;
    let w = window(y, xi_sq, sigma_sq);
    let mass = integrate(|t| scaled_integrand(t, y, xi_sq, sigma_sq, w.shift), w.lo, w.hi, QUAD)?;
    if !(mass > 0.0) {
        return Err(Error::Estimation(format!("vanishing marginal density at y={y}, xi={xi}")));
    }
    Ok(w.shift + mass.ln())
}

/// `Σ_j log m_ξ(y_j)` under unit noise variance.
pub fn marginal_likelihood<T: Real>(y: &ObservationVector<T>, xi: T) -> Result<T> {
    let xi = xi.to_f64_lossy();
    let mut total = 0.0;
    for &v in y.values() {
        total += log_marginal_density(v.to_f64_lossy(), xi, 1.0)?;
    }
    Ok(T::lit(total))
}

/// Posterior mean `E(β | y, ξ) = (1 − E(κ | y, ξ)) y` by quadrature.
pub fn posterior_mean_quadrature<T: Real>(y: T, xi: T, sigma_sq: T) -> Result<T> {
    let (y, xi, s2) = (y.to_f64_lossy(), xi.to_f64_lossy(), sigma_sq.to_f64_lossy());
    check_inputs(y, xi, s2)?;
    let xi_sq = xi * xi;
    let w = window(y, xi_sq, s2);
    let weight = |t: f64| scaled_integrand(t, y, xi_sq, s2, w.shift);
    let den = integrate(weight, w.lo, w.hi, QUAD)?;
    let num = integrate(|t| weight(t) * s2 / (s2 + xi_sq * (2.0 * t).exp()), w.lo, w.hi, QUAD)?;
    if !(den > 0.0) {
        return Err(Error::Estimation(format!("vanishing marginal density at y={y}, xi={xi}")));
    }
    Ok(T::lit(y * (1.0 - num / den)))
}

/// Log-spaced grid of `points` values from `1/m` to 1.
fn xi_grid(m: usize, points: usize) -> Vec<f64> {
    let lo = (1.0 / m as f64).ln();
    if points <= 1 || m <= 1 {
        return vec![lo.exp()];
    }
    (0..points).map(|i| (lo * (1.0 - i as f64 / (points - 1) as f64)).exp()).collect()
}

/// Maximum marginal likelihood estimate of ξ over the default grid.
pub fn mmle_xi<T: Real>(y: &ObservationVector<T>) -> Result<T> {
    mmle_xi_with_grid(y, MMLE_GRID_POINTS)
}

/// Grid maximizer of the marginal likelihood over `[1/m, 1]`; ties resolve to
/// the smaller ξ.
pub fn mmle_xi_with_grid<T: Real>(y: &ObservationVector<T>, points: usize) -> Result<T> {
    if y.is_empty() {
        return Err(Error::Domain("empty observation vector".into()));
    }
    let values: Vec<f64> = y.values().iter().map(|v| v.to_f64_lossy()).collect();
    let mut best = (f64::NEG_INFINITY, 0.0);
    for xi in xi_grid(values.len(), points) {
        let mut ll = 0.0;
        for &v in &values {
            ll += log_marginal_density(v, xi, 1.0)?;
        }
        if ll > best.0 {
            best = (ll, xi);
        }
    }
    log::debug!("mmle: xi={} loglik={}", best.1, best.0);
    Ok(T::lit(best.1))
}
