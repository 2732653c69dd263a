//! Frequentist-assisted horseshoe: the BH rejection count sets the global
//! scale, then the horseshoe posterior mean decides.

use crate::error::{check_gamma, Error, Result};
use crate::horseshoe::{gibbs_run, hs_decision, GibbsConfig, PosteriorSummary, SigmaMode, XiMode};
use crate::model::{DecisionVector, ObservationVector};
use crate::pvalue::{bh_procedure, PValueVector};
use crate::Real;

/// e-FAHS global scale when every hypothesis is rejected.
pub const EFAHS_XI_CAP: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FahsVariant {
    /// ξ̂ = R/m with Jeffreys noise variance.
    Minimax,
    /// ξ̂ = σR/(m − R) with σ² fixed at 1.
    EffectiveSignals,
}

impl FahsVariant {
    pub fn name(self) -> &'static str {
        match self {
            FahsVariant::Minimax => "mfahs",
            FahsVariant::EffectiveSignals => "efahs",
        }
    }
}

/// `R/m`, floored at `1/m`.
pub fn xi_mfahs<T: Real>(rejections: usize, m: usize) -> T {
    assert!(m >= 1 && rejections <= m, "need 0 <= R <= m, m >= 1");
    T::count(rejections.max(1)) / T::count(m)
}

/// `σR/(m − R)`, floored at `1/m` and capped at [`EFAHS_XI_CAP`] when `R = m`.
pub fn xi_efahs<T: Real>(rejections: usize, m: usize, sigma: T) -> T {
    xi_efahs_capped(rejections, m, sigma, T::lit(EFAHS_XI_CAP))
}

pub fn xi_efahs_capped<T: Real>(rejections: usize, m: usize, sigma: T, cap: T) -> T {
    assert!(m >= 1 && rejections <= m, "need 0 <= R <= m, m >= 1");
    if rejections == 0 {
        T::one() / T::count(m)
    } else if rejections == m {
        cap
    } else {
        sigma * T::count(rejections) / T::count(m - rejections)
    }
}

/// One entry of the pipeline trace.
#[derive(Debug, Clone, PartialEq)]
pub enum FahsStep<T> {
    BhRejections(usize),
    GlobalScale(T),
    Sampler { sweeps: usize, xi: T },
    Decision { rejections: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FahsResult<T> {
    pub decisions: DecisionVector,
    pub xi_hat: T,
    /// BH rejection count used as the signal-count estimate.
    pub m1_hat: usize,
    pub summary: PosteriorSummary<T>,
    pub steps: Vec<FahsStep<T>>,
}

/// Runs the four-step pipeline. The ξ and σ² modes in `config` are replaced
/// by the ones the variant prescribes; burn-in, sample count and seed are kept.
pub fn run_fahs<T: Real>(
    y: &ObservationVector<T>,
    gamma: T,
    variant: FahsVariant,
    config: &GibbsConfig<T>,
) -> Result<FahsResult<T>> {
    check_gamma(gamma)?;
    let m = y.len();
    let mut steps = Vec::with_capacity(4);

    let p = PValueVector::from_observations(y);
    let m1_hat = bh_procedure(&p, gamma)?.rejections();
    steps.push(FahsStep::BhRejections(m1_hat));

    let (xi_hat, sigma_mode) = match variant {
        FahsVariant::Minimax => (xi_mfahs(m1_hat, m), SigmaMode::Jeffreys),
        FahsVariant::EffectiveSignals => (xi_efahs(m1_hat, m, T::one()), SigmaMode::Fixed(T::one())),
    };
    steps.push(FahsStep::GlobalScale(xi_hat));

    let config = GibbsConfig { xi_mode: XiMode::Fixed(xi_hat), sigma_mode, ..*config };
    let summary = gibbs_run(y, &config)?;
    steps.push(FahsStep::Sampler { sweeps: config.burn_in + config.samples, xi: xi_hat });

    let decisions = hs_decision(&summary, y)?;
    steps.push(FahsStep::Decision { rejections: decisions.rejections() });
    log::debug!("{}: R_bh={m1_hat} xi={xi_hat} R={}", variant.name(), decisions.rejections());

    Ok(FahsResult { decisions, xi_hat, m1_hat, summary, steps })
}

/// Where the exponent `c` sits relative to the admissible ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExponentRegime {
    /// `0 < c < 1`, admissible under both readings.
    Narrow,
    /// `1 ≤ c < 1 + ω/2`.
    Wide,
    OutOfRange,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem1Report<T> {
    pub xi: T,
    pub lower_bound: T,
    pub upper_bound: T,
    pub alpha: T,
    pub omega: T,
    pub c: T,
    pub slack: T,
    /// `ξ ≥ lower_bound`.
    pub satisfied_lower: bool,
    /// `ξ ≤ slack · upper_bound`; the underlying condition is asymptotic.
    pub satisfied_upper: bool,
    pub regime: ExponentRegime,
    /// `√(2+ω) + √ω`, the ℓ₂ contraction constant.
    pub l2_constant: T,
    /// `√(2+ω) + √(ω²/5) + √(ω/5)`, the ℓ₁ contraction constant.
    pub l1_constant: T,
}

pub const DEFAULT_ALPHA: f64 = 2.0;
pub const DEFAULT_OMEGA: f64 = 2.0;
pub const DEFAULT_EXPONENT: f64 = 1.5;

/// Evaluates the sharp-contraction window for the global scale:
/// `lower = ((m₁/m)^c √log(m/m₁))^{1/(α−1)}` and
/// `upper = (((m₁/m) log(m/m₁))^α)^{1/(α−1)}`.
pub fn theorem1_report<T: Real>(xi: T, m: usize, m1: usize, alpha: T, omega: T, c: T) -> Result<Theorem1Report<T>> {
    theorem1_report_with_slack(xi, m, m1, alpha, omega, c, T::one())
}

pub fn theorem1_report_with_slack<T: Real>(
    xi: T,
    m: usize,
    m1: usize,
    alpha: T,
    omega: T,
    c: T,
    slack: T,
) -> Result<Theorem1Report<T>> {
    if m1 == 0 || m1 >= m {
        return Err(Error::Domain(format!("need 0 < m1 < m, got m1={m1}, m={m}")));
    }
    if !(alpha > T::one()) || !(omega > T::zero()) || !(slack > T::zero()) {
        return Err(Error::Domain("need alpha > 1, omega > 0, slack > 0".into()));
    }
    let frac = T::count(m1) / T::count(m);
    let log_ratio = (T::count(m) / T::count(m1)).ln();
    let inv = T::one() / (alpha - T::one());
    let lower_bound = (frac.powf(c) * log_ratio.sqrt()).powf(inv);
    let upper_bound = (frac * log_ratio).powf(alpha).powf(inv);
    let two = T::lit(2.0);
    let regime = if c > T::zero() && c < T::one() {
        ExponentRegime::Narrow
    } else if c >= T::one() && c < T::one() + omega / two {
        ExponentRegime::Wide
    } else {
        ExponentRegime::OutOfRange
    };
    let five = T::lit(5.0);
    Ok(Theorem1Report {
        xi,
        lower_bound,
        upper_bound,
        alpha,
        omega,
        c,
        slack,
        satisfied_lower: xi >= lower_bound,
        satisfied_upper: xi <= slack * upper_bound,
        regime,
        l2_constant: (two + omega).sqrt() + omega.sqrt(),
        l1_constant: (two + omega).sqrt() + (omega * omega / five).sqrt() + (omega / five).sqrt(),
    })
}
