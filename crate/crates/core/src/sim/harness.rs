use std::time::Instant;

use rayon::prelude::*;

use crate::model::{confusion, fdp_and_power, GroundTruth, ObservationVector};
use crate::pdc::{pdc_check, NoiseCovariance, DEFAULT_THRESHOLD};
use crate::procedure::{run_procedure, Procedure, ProcedureConfig};
use crate::rng::derive_key;
use crate::Real;

use super::{generate, SimulationSetting};

/// Outcome of one procedure on one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationRecord<T> {
    pub setting_id: usize,
    pub replication: usize,
    pub seed: u64,
    pub procedure: Procedure,
    pub s: T,
    pub gamma: T,
    pub rho: T,
    pub m: usize,
    pub rejections: usize,
    pub false_discoveries: usize,
    pub true_discoveries: usize,
    pub fdp: T,
    pub power: T,
    pub xi_hat: Option<T>,
    pub pdc_tail: Option<T>,
    /// Zero unless timing was requested.
    pub wall_ms: u64,
    pub error: Option<String>,
}

impl<T: Real> ReplicationRecord<T> {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    pub procedure: ProcedureConfig,
    /// Record wall-clock time per procedure. Off by default so that output
    /// depends only on the configuration.
    pub timing: bool,
    /// Attach the prior-data conflict tail probability to horseshoe records
    /// with a data-driven ξ.
    pub pdc: bool,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self { procedure: ProcedureConfig::default(), timing: false, pdc: true }
    }
}

/// Seed of replication `replication` in setting `setting_id`.
pub fn child_seed(base_seed: u64, setting_id: usize, replication: usize) -> u64 {
    derive_key(base_seed, &[setting_id as u64, replication as u64])
}

/// Generates one data set and runs every procedure of the setting on it.
pub fn run_replication<T: Real>(
    setting_id: usize,
    setting: &SimulationSetting<T>,
    replication: usize,
    options: &GridOptions,
) -> Vec<ReplicationRecord<T>> {
    let seed = child_seed(setting.base_seed, setting_id, replication);
    let blank = |procedure: Procedure| ReplicationRecord {
        setting_id,
        replication,
        seed,
        procedure,
        s: setting.s,
        gamma: setting.gamma,
        rho: setting.rho,
        m: setting.m,
        rejections: 0,
        false_discoveries: 0,
        true_discoveries: 0,
        fdp: T::nan(),
        power: T::nan(),
        xi_hat: None,
        pdc_tail: None,
        wall_ms: 0,
        error: None,
    };
    let data = match generate(setting, seed) {
        Ok(d) => d,
        Err(e) => {
            log::warn!("setting {setting_id} replication {replication}: data generation failed: {e}");
            return setting
                .procedures
                .iter()
                .map(|&p| ReplicationRecord { error: Some(format!("data generation: {e}")), ..blank(p) })
                .collect();
        }
    };
    setting
        .procedures
        .iter()
        .map(|&p| {
            let start = Instant::now();
            let mut rec = blank(p);
            match evaluate(p, &data.0, &data.1, setting, seed, options) {
                Ok((r, fd, td, fdp, power, xi, pdc)) => {
                    rec.rejections = r;
                    rec.false_discoveries = fd;
                    rec.true_discoveries = td;
                    rec.fdp = fdp;
                    rec.power = power;
                    rec.xi_hat = xi;
                    rec.pdc_tail = pdc;
                }
                Err(e) => {
                    log::warn!("setting {setting_id} replication {replication} {p}: {e}");
                    rec.error = Some(e.to_string());
                }
            }
            if options.timing {
                rec.wall_ms = start.elapsed().as_millis() as u64;
            }
            rec
        })
        .collect()
}

type Evaluation<T> = (usize, usize, usize, T, T, Option<T>, Option<T>);

fn evaluate<T: Real>(
    procedure: Procedure,
    y: &ObservationVector<T>,
    truth: &GroundTruth<T>,
    setting: &SimulationSetting<T>,
    seed: u64,
    options: &GridOptions,
) -> crate::Result<Evaluation<T>> {
    let out = run_procedure(procedure, y, setting.gamma, seed, &options.procedure, Some(truth))?;
    let table = confusion(&out.decisions, truth)?;
    let summary = fdp_and_power::<T>(&table);
    let pdc = match (options.pdc, procedure, out.xi_hat) {
        (true, Procedure::Mfahs | Procedure::Efahs, Some(xi)) => {
            let cov = NoiseCovariance::equicorrelated(setting.rho);
            Some(pdc_check(y, xi, cov, T::lit(DEFAULT_THRESHOLD), seed)?.tail_probability)
        }
        _ => None,
    };
    Ok((
        table.rejections(),
        table.false_discoveries,
        table.true_discoveries,
        summary.fdp,
        summary.power,
        out.xi_hat,
        pdc,
    ))
}

/// Runs every (setting, replication) pair in parallel on the current rayon
/// pool. Records come back ordered by setting, replication and then the
/// setting's procedure list, independent of the number of workers.
pub fn run_grid<T: Real>(settings: &[SimulationSetting<T>], options: &GridOptions) -> Vec<ReplicationRecord<T>> {
    let jobs: Vec<(usize, usize)> = settings
        .iter()
        .enumerate()
        .flat_map(|(i, s)| (0..s.replications).map(move |r| (i, r)))
        .collect();
    jobs.par_iter()
        .map(|&(i, r)| run_replication(i, &settings[i], r, options))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}
