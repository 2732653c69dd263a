use std::path::PathBuf;

use anyhow::{anyhow, bail, Result};
use fahs::horseshoe::{gibbs_run, posterior_mean_quadrature, GibbsConfig, SigmaMode, XiMode};
use fahs::rng::derive_key;
use fahs::ObservationVector;
use rayon::prelude::*;

use crate::config::{self, KeyTable, KeyValues};
use crate::output::write_file;
use crate::{load_keys, with_pool, CmdResult, ConfigContext, Failure, OracleArgs};

pub const KEYS: KeyTable = &[
    ("xi", "comma-separated fixed global scales (default 0.01,0.05,0.5)"),
    ("y", "comma-separated observations (default 0,0.5,1,2,4,8)"),
    ("copies", "independent coordinates per observation, averaged (default 100)"),
    ("burn_in", "Gibbs burn-in sweeps (default 1000)"),
    ("samples", "Gibbs sweeps kept after burn-in (default 5000)"),
    ("tolerance", "largest accepted absolute difference (default 0.05); exit 3 when exceeded"),
    ("seed", "sampler seed (default 1)"),
    ("threads", "worker threads (default: available cores)"),
    ("out", "directory for oracle_check.csv (default: print only)"),
];

pub struct OracleConfig {
    pub xi: Vec<f64>,
    pub y: Vec<f64>,
    pub copies: usize,
    pub burn_in: usize,
    pub samples: usize,
    pub tolerance: f64,
    pub seed: u64,
    pub threads: usize,
    pub out: Option<PathBuf>,
}

pub fn build(kv: &KeyValues) -> Result<OracleConfig> {
    let cfg = OracleConfig {
        xi: kv.list("xi")?.unwrap_or_else(|| vec![0.01, 0.05, 0.5]),
        y: kv.list("y")?.unwrap_or_else(|| vec![0.0, 0.5, 1.0, 2.0, 4.0, 8.0]),
        copies: kv.get_or("copies", 100)?,
        burn_in: kv.get_or("burn_in", fahs::horseshoe::DEFAULT_BURN_IN)?,
        samples: kv.get_or("samples", fahs::horseshoe::DEFAULT_SAMPLES)?,
        tolerance: kv.get_or("tolerance", 0.05)?,
        seed: kv.get_or("seed", 1)?,
        threads: config::threads(kv)?,
        out: kv.raw("out").map(PathBuf::from),
    };
    if cfg.xi.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        bail!("every xi must be positive");
    }
    if cfg.y.iter().any(|v| !v.is_finite()) {
        bail!("every y must be finite");
    }
    if cfg.copies == 0 || cfg.samples == 0 {
        bail!("copies and samples must be at least 1");
    }
    if !(cfg.tolerance > 0.0) {
        bail!("tolerance must be positive");
    }
    Ok(cfg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleRow {
    pub xi: f64,
    pub y: f64,
    pub gibbs: f64,
    pub quadrature: f64,
}

impl OracleRow {
    pub fn error(&self) -> f64 {
        (self.gibbs - self.quadrature).abs()
    }
}

/// Gibbs posterior means at fixed ξ and σ² = 1, each averaged over `copies`
/// independent coordinates sharing one chain, next to the quadrature value.
pub fn compare(cfg: &OracleConfig) -> Result<Vec<OracleRow>> {
    let rows = cfg
        .xi
        .par_iter()
        .enumerate()
        .map(|(k, &xi)| -> Result<Vec<OracleRow>> {
            let data: Vec<f64> = cfg.y.iter().flat_map(|&v| std::iter::repeat(v).take(cfg.copies)).collect();
            let gibbs = GibbsConfig::new(XiMode::Fixed(xi), SigmaMode::Fixed(1.0), derive_key(cfg.seed, &[k as u64]))
                .with_length(cfg.burn_in, cfg.samples);
            let summary = gibbs_run(&ObservationVector::new(data)?, &gibbs)?;
            cfg.y
                .iter()
                .enumerate()
                .map(|(i, &y)| {
                    let block = &summary.beta_mean[i * cfg.copies..(i + 1) * cfg.copies];
                    Ok(OracleRow {
                        xi,
                        y,
                        gibbs: block.iter().sum::<f64>() / cfg.copies as f64,
                        quadrature: posterior_mean_quadrature(y, xi, 1.0)?,
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows.into_iter().flatten().collect())
}

pub fn run(args: OracleArgs) -> CmdResult {
    let kv = load_keys(&args.common, KEYS, &[])?;
    let cfg = build(&kv).config_err()?;
    let rows = with_pool(cfg.threads, || compare(&cfg))?.runtime_err()?;
    println!("{:>6} {:>6} {:>10} {:>10} {:>8}", "xi", "y", "gibbs", "quadrature", "abs_diff");
    for r in &rows {
        println!("{:>6} {:>6} {:>10.5} {:>10.5} {:>8.5}", r.xi, r.y, r.gibbs, r.quadrature, r.error());
    }
    if let Some(out) = &cfg.out {
        std::fs::create_dir_all(out).config_err()?;
        write_file(&out.join("oracle_check.csv"), |w| {
            let mut c = csv::Writer::from_writer(w);
            c.write_record(["xi", "y", "gibbs", "quadrature", "abs_diff"])?;
            for r in &rows {
                c.write_record([r.xi, r.y, r.gibbs, r.quadrature, r.error()].map(|v| v.to_string()))?;
            }
            c.flush()?;
            Ok(())
        })
        .config_err()?;
    }
    let worst = rows.iter().map(OracleRow::error).fold(0.0, f64::max);
    if worst > cfg.tolerance {
        return Err(Failure::Runtime(anyhow!("largest difference {worst:.4} exceeds tolerance {}", cfg.tolerance)));
    }
    println!("max abs diff {worst:.5} within tolerance {}", cfg.tolerance);
    Ok(())
}
