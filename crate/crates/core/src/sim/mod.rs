//! Simulation studies: sparse normal means data, replication grids and
//! FDP/power aggregation.

mod aggregate;
mod generate;
mod harness;

pub use aggregate::{aggregate, quantile_type7, AggregateSummary, BoxplotStats, CellSummary};
pub use generate::{generate, generate_equicorrelated, generate_independent};
pub use harness::{child_seed, run_grid, run_replication, GridOptions, ReplicationRecord};

use crate::error::{Error, Result};
use crate::procedure::Procedure;
use crate::Real;

/// How the slab draws are rescaled before multiplying by the SNR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Standardize {
    /// Sample sd over all m entries, zeros included.
    #[default]
    All,
    /// Sample sd over the nonzero entries only.
    Nonzero,
}

impl std::str::FromStr for Standardize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Standardize::All),
            "nonzero" => Ok(Standardize::Nonzero),
            _ => Err(Error::Config(format!("standardize must be `all` or `nonzero`, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSetting<T> {
    pub m: usize,
    /// Signal proportion.
    pub s: T,
    /// Slab standard deviation.
    pub psi: T,
    pub snr: T,
    pub rho: T,
    pub gamma: T,
    pub replications: usize,
    pub base_seed: u64,
    pub procedures: Vec<Procedure>,
    pub standardize: Standardize,
}

pub const DEFAULT_PSI: f64 = 5.0;
pub const DEFAULT_SNR: f64 = 3.0;

impl<T: Real> SimulationSetting<T> {
    pub fn new(m: usize, s: T, gamma: T, rho: T, replications: usize, base_seed: u64, procedures: Vec<Procedure>) -> Self {
        Self {
            m,
            s,
            psi: T::lit(DEFAULT_PSI),
            snr: T::lit(DEFAULT_SNR),
            rho,
            gamma,
            replications,
            base_seed,
            procedures,
            standardize: Standardize::All,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(what.to_string()));
        if self.m < 2 {
            return bad("m must be at least 2");
        }
        if !(self.s > T::zero() && self.s <= T::one()) {
            return bad("s must lie in (0, 1]");
        }
        if !(self.psi > T::zero() && self.psi.is_finite()) || !(self.snr > T::zero() && self.snr.is_finite()) {
            return bad("psi and snr must be positive");
        }
        if !(self.rho >= T::zero() && self.rho < T::one()) {
            return bad("rho must lie in [0, 1)");
        }
        if !(self.gamma > T::zero() && self.gamma < T::one()) {
            return bad("gamma must lie in (0, 1)");
        }
        if self.replications == 0 {
            return bad("replications must be at least 1");
        }
        if self.procedures.is_empty() {
            return bad("at least one procedure is required");
        }
        Ok(())
    }
}

/// Cartesian grid over signal proportion, level and correlation; settings are
/// ordered with `s` outermost and `rho` innermost.
pub fn grid<T: Real>(
    m: usize,
    s_values: &[T],
    gammas: &[T],
    rhos: &[T],
    replications: usize,
    base_seed: u64,
    procedures: &[Procedure],
) -> Vec<SimulationSetting<T>> {
    let mut out = Vec::with_capacity(s_values.len() * gammas.len() * rhos.len());
    for &s in s_values {
        for &gamma in gammas {
            for &rho in rhos {
                out.push(SimulationSetting::new(m, s, gamma, rho, replications, base_seed, procedures.to_vec()));
            }
        }
    }
    out
}

/// m = 2000, 30 replications, s ∈ {0.05, 0.2, 0.5}, γ ∈ {0.1, 0.2}, ρ = 0.
pub fn desk_preset<T: Real>(base_seed: u64, procedures: &[Procedure]) -> Vec<SimulationSetting<T>> {
    let lit = |v: &[f64]| v.iter().map(|&x| T::lit(x)).collect::<Vec<T>>();
    grid(2_000, &lit(&[0.05, 0.2, 0.5]), &lit(&[0.1, 0.2]), &lit(&[0.0]), 30, base_seed, procedures)
}

/// m = 10000, 100 replications over the full s × γ × ρ grid.
pub fn paper_preset<T: Real>(base_seed: u64, procedures: &[Procedure]) -> Vec<SimulationSetting<T>> {
    let lit = |v: &[f64]| v.iter().map(|&x| T::lit(x)).collect::<Vec<T>>();
    grid(
        10_000,
        &lit(&[0.05, 0.1, 0.2, 0.3, 0.4, 0.5]),
        &lit(&[0.1, 0.12, 0.14, 0.16, 0.18, 0.2]),
        &lit(&[0.0, 0.1, 0.2, 0.3]),
        100,
        base_seed,
        procedures,
    )
}
