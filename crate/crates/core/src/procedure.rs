//! Uniform front end over every testing procedure in the crate.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fahs::{run_fahs, FahsVariant};
use crate::horseshoe::{gibbs_run, hs_decision, GibbsConfig, SigmaMode, XiMode, DEFAULT_BURN_IN, DEFAULT_SAMPLES};
use crate::model::{DecisionVector, GroundTruth, ObservationVector};
use crate::pvalue::{bh_procedure, qvalue_procedure, PValueVector};
use crate::rng::derive_key;
use crate::twogroups::{twogroups_procedure, NullMode, DEFAULT_BINS, DEFAULT_DF};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Procedure {
    Bh,
    QValue,
    Locfdr,
    Ebhs,
    Fbhs,
    Mfahs,
    Efahs,
    Oracle,
}

impl Procedure {
    pub const ALL: [Procedure; 8] = [
        Procedure::Bh,
        Procedure::QValue,
        Procedure::Locfdr,
        Procedure::Ebhs,
        Procedure::Fbhs,
        Procedure::Mfahs,
        Procedure::Efahs,
        Procedure::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Procedure::Bh => "bh",
            Procedure::QValue => "qvalue",
            Procedure::Locfdr => "locfdr",
            Procedure::Ebhs => "ebhs",
            Procedure::Fbhs => "fbhs",
            Procedure::Mfahs => "mfahs",
            Procedure::Efahs => "efahs",
            Procedure::Oracle => "oracle",
        }
    }

    pub fn is_horseshoe(self) -> bool {
        matches!(self, Procedure::Ebhs | Procedure::Fbhs | Procedure::Mfahs | Procedure::Efahs)
    }

    fn stream_tag(self) -> u64 {
        self as u64 + 1
    }

    /// Parses a comma-separated list such as `bh,mfahs,efahs`.
    pub fn parse_list(list: &str) -> Result<Vec<Procedure>> {
        let mut out = Vec::new();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let p: Procedure = item.parse()?;
            if !out.contains(&p) {
                out.push(p);
            }
        }
        if out.is_empty() {
            return Err(Error::Config("empty procedure list".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for Procedure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Procedure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Procedure::ALL
            .iter()
            .copied()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown procedure `{s}`")))
    }
}

/// Tuning shared by all procedures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcedureConfig {
    pub burn_in: usize,
    pub samples: usize,
    pub bins: usize,
    pub df: usize,
    pub null_mode: NullMode,
}

impl Default for ProcedureConfig {
    fn default() -> Self {
        Self {
            burn_in: DEFAULT_BURN_IN,
            samples: DEFAULT_SAMPLES,
            bins: DEFAULT_BINS,
            df: DEFAULT_DF,
            null_mode: NullMode::Theoretical,
        }
    }
}

/// Direction in which `statistic` ranks discoveries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankOrder {
    /// Smaller is stronger (p-values, q-values, locfdr).
    Ascending,
    /// Larger is stronger (|β̂|).
    Descending,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcedureOutcome<T> {
    pub procedure: Procedure,
    pub decisions: DecisionVector,
    pub xi_hat: Option<T>,
    pub statistic: Vec<T>,
    pub order: RankOrder,
}

impl<T: Real> ProcedureOutcome<T> {
    /// Rejected indices, strongest first; ties keep index order.
    pub fn ranked_rejections(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = self.decisions.rejected_indices().collect();
        let s = &self.statistic;
        idx.sort_by(|&a, &b| {
            let o = s[a].partial_cmp(&s[b]).unwrap_or(std::cmp::Ordering::Equal);
            match self.order {
                RankOrder::Ascending => o,
                RankOrder::Descending => o.reverse(),
            }
        });
        idx
    }
}

/// Runs `procedure` on `y` at level `gamma`. Horseshoe samplers draw from a
/// stream derived from `seed` and the procedure. `truth` is needed only by
/// the oracle.
pub fn run_procedure<T: Real>(
    procedure: Procedure,
    y: &ObservationVector<T>,
    gamma: T,
    seed: u64,
    config: &ProcedureConfig,
    truth: Option<&GroundTruth<T>>,
) -> Result<ProcedureOutcome<T>> {
    crate::error::check_gamma(gamma)?;
    let gibbs_seed = derive_key(seed, &[procedure.stream_tag()]);
    let gibbs = |xi_mode, sigma_mode| {
        GibbsConfig::new(xi_mode, sigma_mode, gibbs_seed).with_length(config.burn_in, config.samples)
    };
    let abs_beta = |beta: &[T]| beta.iter().map(|b| b.abs()).collect::<Vec<T>>();

    let outcome = match procedure {
        Procedure::Bh => {
            let p = PValueVector::from_observations(y);
            ProcedureOutcome {
                procedure,
                decisions: bh_procedure(&p, gamma)?,
                xi_hat: None,
                statistic: p.values().to_vec(),
                order: RankOrder::Ascending,
            }
        }
        Procedure::QValue => {
            let p = PValueVector::from_observations(y);
            let (decisions, q) = qvalue_procedure(&p, gamma)?;
            ProcedureOutcome { procedure, decisions, xi_hat: None, statistic: q.q, order: RankOrder::Ascending }
        }
        Procedure::Locfdr => {
            let (decisions, lfdr) = twogroups_procedure(y, gamma, config.bins, config.df, config.null_mode)?;
            ProcedureOutcome {
                procedure,
                decisions,
                xi_hat: None,
                statistic: lfdr.values().to_vec(),
                order: RankOrder::Ascending,
            }
        }
        Procedure::Ebhs | Procedure::Fbhs => {
            let xi_mode = if procedure == Procedure::Ebhs { XiMode::Mmle } else { XiMode::FullBayes };
            let summary = gibbs_run(y, &gibbs(xi_mode, SigmaMode::Jeffreys))?;
            ProcedureOutcome {
                procedure,
                decisions: hs_decision(&summary, y)?,
                xi_hat: Some(summary.xi_mean),
                statistic: abs_beta(&summary.beta_mean),
                order: RankOrder::Descending,
            }
        }
        Procedure::Mfahs | Procedure::Efahs => {
            let variant = if procedure == Procedure::Mfahs { FahsVariant::Minimax } else { FahsVariant::EffectiveSignals };
            let r = run_fahs(y, gamma, variant, &gibbs(XiMode::FullBayes, SigmaMode::Jeffreys))?;
            ProcedureOutcome {
                procedure,
                statistic: abs_beta(&r.summary.beta_mean),
                decisions: r.decisions,
                xi_hat: Some(r.xi_hat),
                order: RankOrder::Descending,
            }
        }
        Procedure::Oracle => {
            let truth = truth.ok_or_else(|| Error::Config("oracle procedure needs the ground truth".into()))?;
            if truth.len() != y.len() {
                return Err(Error::Dimension { expected: y.len(), found: truth.len() });
            }
            ProcedureOutcome {
                procedure,
                decisions: DecisionVector::new(truth.signal().to_vec()),
                xi_hat: None,
                statistic: abs_beta(truth.beta()),
                order: RankOrder::Descending,
            }
        }
    };
    Ok(outcome)
}
