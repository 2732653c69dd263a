//! Two-groups empirical Bayes: marginal density estimation, null estimation,
//! local false discovery rates and the running-mean step-up rule.

mod lindsey;
mod spline;

pub use lindsey::{fit_lindsey, LindseyDensity, DEFAULT_BINS, DEFAULT_DF, IRLS_MAX_ITER, IRLS_TOL};
pub use spline::NaturalSplineBasis;

use crate::error::{check_gamma, Error, Result};
use crate::linalg::polyfit;
use crate::model::{DecisionVector, ObservationVector};
use crate::special::normal_pdf;
use crate::Real;

/// A marginal density f evaluable anywhere on the real line.
pub trait MarginalDensity<T: Real> {
    fn density(&self, z: T) -> T;

    fn log_density(&self, z: T) -> T {
        self.density(z).ln()
    }
}

/// Closed-form densities (oracle plug-ins) are plain closures.
impl<T: Real, F: Fn(T) -> T> MarginalDensity<T> for F {
    fn density(&self, z: T) -> T {
        self(z)
    }
}

/// f̂ together with the null component (π̂₀, μ₀, σ₀).
#[derive(Debug, Clone)]
pub struct TwoGroupsFit<T, D = LindseyDensity<T>> {
    pub density: D,
    pub pi0_hat: T,
    pub null_mean: T,
    pub null_sd: T,
}

impl<T: Real, D: MarginalDensity<T>> TwoGroupsFit<T, D> {
    /// Theoretical N(0, 1) null with π̂₀ = 1 until [`estimate_null`] is applied.
    pub fn new(density: D) -> Self {
        Self {
            density,
            pi0_hat: T::one(),
            null_mean: T::zero(),
            null_sd: T::one(),
        }
    }

    pub fn with_null(mut self, null: NullEstimate<T>) -> Self {
        self.pi0_hat = null.pi0_hat;
        self.null_mean = null.null_mean;
        self.null_sd = null.null_sd;
        self
    }

    pub fn f_hat(&self, z: T) -> T {
        self.density.density(z)
    }

    /// π̂₀ f₀(z).
    pub fn null_density(&self, z: T) -> T {
        self.pi0_hat * normal_pdf((z - self.null_mean) / self.null_sd) / self.null_sd
    }

    /// ln(π̂₀ f₀(z) / f̂(z)), finite where both densities underflow.
    pub fn log_locfdr(&self, z: T) -> T {
        let u = (z - self.null_mean) / self.null_sd;
        let ln_f0 = -T::lit(0.5) * u * u - T::lit(0.5 * (2.0 * std::f64::consts::PI).ln()) - self.null_sd.ln();
        self.pi0_hat.ln() + ln_f0 - self.density.log_density(z)
    }
}

/// Lindsey's-method fit of the marginal density of `z`.
pub fn fit_marginal_density<T: Real>(z: &ObservationVector<T>, bins: usize, df: usize) -> Result<TwoGroupsFit<T>> {
    Ok(TwoGroupsFit::new(fit_lindsey(z, bins, df)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NullMode {
    #[default]
    Theoretical,
    Empirical,
}

impl std::str::FromStr for NullMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theoretical" => Ok(NullMode::Theoretical),
            "empirical" => Ok(NullMode::Empirical),
            _ => Err(Error::Config(format!("null must be `theoretical` or `empirical`, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullEstimate<T> {
    pub null_mean: T,
    pub null_sd: T,
    pub pi0_hat: T,
}

/// Half-width of the central matching window around the mode of f̂.
pub const CENTRAL_HALF_WIDTH: f64 = 1.0;
/// Minimum number of observations inside the central window.
pub const CENTRAL_MIN_SUPPORT: usize = 10;
const MODE_GRID: usize = 1024;
const WINDOW_GRID: usize = 41;

/// Central matching of f̂ around its mode between the quartiles of z. Theoretical mode keeps N(0, 1)
/// and matches π̂₀ by the ratio of f̂ to φ over the window; empirical mode
/// fits a quadratic to log f̂ over the window and reads off (μ₀, σ₀, π̂₀).
pub fn estimate_null<T: Real, D: MarginalDensity<T>>(
    z: &ObservationVector<T>,
    fit: &TwoGroupsFit<T, D>,
    mode: NullMode,
) -> Result<NullEstimate<T>> {
    let lo = z.values().iter().copied().fold(T::infinity(), T::min);
    let hi = z.values().iter().copied().fold(T::neg_infinity(), T::max);
    if !(hi > lo) {
        return Err(Error::Fit { reason: "degenerate range".into(), iterations: 0 });
    }
    // The null peak is searched between the quartiles of z: a spline fit can
    // spike at an isolated extreme observation.
    let mut sorted = z.values().to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let (q1, q3) = (
        crate::sim::quantile_type7(&sorted, T::lit(0.25)),
        crate::sim::quantile_type7(&sorted, T::lit(0.75)),
    );
    let step = (q3 - q1) / T::count(MODE_GRID - 1);
    let peak = (0..MODE_GRID)
        .map(|i| q1 + step * T::count(i))
        .map(|x| (x, fit.f_hat(x)))
        .fold((q1, T::neg_infinity()), |best, cur| if cur.1 > best.1 { cur } else { best })
        .0;

    let half = T::lit(CENTRAL_HALF_WIDTH);
    let (w_lo, w_hi) = ((peak - half).max(lo), (peak + half).min(hi));
    let support = z.values().iter().filter(|&&v| v >= w_lo && v <= w_hi).count();
    if support < CENTRAL_MIN_SUPPORT {
        return Err(Error::Fit {
            reason: format!("central window holds {support} observations, need {CENTRAL_MIN_SUPPORT}"),
            iterations: 0,
        });
    }
    let grid: Vec<T> = (0..WINDOW_GRID)
        .map(|i| w_lo + (w_hi - w_lo) * T::count(i) / T::count(WINDOW_GRID - 1))
        .collect();

    match mode {
        NullMode::Theoretical => {
            let f: T = grid.iter().map(|&x| fit.f_hat(x)).sum();
            let phi: T = grid.iter().map(|&x| normal_pdf(x)).sum();
            let pi0 = (f / phi).min(T::one());
            if !(pi0 > T::zero()) {
                return Err(Error::Estimation(format!("central matching gave pi0 = {pi0}")));
            }
            Ok(NullEstimate { null_mean: T::zero(), null_sd: T::one(), pi0_hat: pi0 })
        }
        NullMode::Empirical => {
            let logs: Vec<T> = grid.iter().map(|&x| fit.f_hat(x).ln()).collect();
            if logs.iter().any(|v| !v.is_finite()) {
                return Err(Error::Estimation("f_hat vanishes inside the central window".into()));
            }
            let c = polyfit(&grid, &logs, 2)
                .ok_or_else(|| Error::Estimation("singular quadratic fit".into()))?;
            if !(c[2] < T::zero()) {
                return Err(Error::Estimation("log f_hat is not concave near its mode".into()));
            }
            let two = T::lit(2.0);
            let var = -T::one() / (two * c[2]);
            let mean = c[1] * var;
            let sd = var.sqrt();
            let log_k = c[0] + mean * mean / (two * var);
            let pi0 = (log_k.exp() * sd * T::lit((2.0 * std::f64::consts::PI).sqrt())).min(T::one());
            Ok(NullEstimate { null_mean: mean, null_sd: sd, pi0_hat: pi0 })
        }
    }
}

/// Local false discovery rates clipped to [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct LocfdrVector<T> {
    values: Vec<T>,
}

impl<T: Real> LocfdrVector<T> {
    pub fn new(values: Vec<T>) -> Self {
        Self {
            values: values.into_iter().map(|v| v.max(T::zero()).min(T::one())).collect(),
        }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// locfdr(z) = π̂₀ f₀(z) / f̂(z), evaluated as a log ratio; an undefined
/// ratio yields 1.
pub fn locfdr_values<T: Real, D: MarginalDensity<T>>(
    z: &ObservationVector<T>,
    fit: &TwoGroupsFit<T, D>,
) -> LocfdrVector<T> {
    let values = z
        .values()
        .iter()
        .map(|&zj| fit.log_locfdr(zj).exp())
        .map(|v| if v.is_nan() { T::one() } else { v })
        .collect();
    LocfdrVector::new(values)
}

/// Rejects the k smallest locfdr values, k the largest index whose running
/// mean of sorted values is ≤ γ.
pub fn eb_stepup<T: Real>(locfdr: &LocfdrVector<T>, gamma: T) -> Result<DecisionVector> {
    check_gamma(gamma)?;
    let v = locfdr.values();
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
    let mut sum = T::zero();
    let mut k = 0;
    for (i, &j) in order.iter().enumerate() {
        sum = sum + v[j];
        if sum <= gamma * T::count(i + 1) {
            k = i + 1;
        }
    }
    let mut reject = vec![false; v.len()];
    for &j in &order[..k] {
        reject[j] = true;
    }
    Ok(DecisionVector::new(reject))
}

/// Full two-groups procedure: fit, estimate the null, step up at γ.
pub fn twogroups_procedure<T: Real>(
    z: &ObservationVector<T>,
    gamma: T,
    bins: usize,
    df: usize,
    mode: NullMode,
) -> Result<(DecisionVector, LocfdrVector<T>)> {
    let fit = fit_marginal_density(z, bins, df)?;
    let null = estimate_null(z, &fit, mode)?;
    let fit = fit.with_null(null);
    let lfdr = locfdr_values(z, &fit);
    Ok((eb_stepup(&lfdr, gamma)?, lfdr))
}
