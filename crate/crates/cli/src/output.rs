//! CSV writers.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use fahs::realdata::GeneRanking;
use fahs::sim::{AggregateSummary, ReplicationRecord};
use serde::Serialize;

pub const RECORD_COLUMNS: [&str; 16] = [
    "setting_id", "replication", "seed", "procedure", "s", "gamma", "rho", "m", "R", "FD", "TD", "fdp", "power",
    "xi_hat", "pdc_tail", "wall_ms",
];

#[derive(Serialize)]
struct RecordRow<'a> {
    setting_id: usize,
    replication: usize,
    seed: u64,
    procedure: &'a str,
    s: f64,
    gamma: f64,
    rho: f64,
    m: usize,
    #[serde(rename = "R")]
    rejections: usize,
    #[serde(rename = "FD")]
    false_discoveries: usize,
    #[serde(rename = "TD")]
    true_discoveries: usize,
    fdp: f64,
    power: f64,
    xi_hat: Option<f64>,
    pdc_tail: Option<f64>,
    wall_ms: u64,
}

pub fn write_records<W: Write>(out: W, records: &[ReplicationRecord<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(RecordRow {
            setting_id: r.setting_id,
            replication: r.replication,
            seed: r.seed,
            procedure: r.procedure.name(),
            s: r.s,
            gamma: r.gamma,
            rho: r.rho,
            m: r.m,
            rejections: r.rejections,
            false_discoveries: r.false_discoveries,
            true_discoveries: r.true_discoveries,
            fdp: r.fdp,
            power: r.power,
            xi_hat: r.xi_hat,
            pdc_tail: r.pdc_tail,
            wall_ms: r.wall_ms,
        })?;
    }
    if records.is_empty() {
        w.write_record(RECORD_COLUMNS)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    setting_id: usize,
    procedure: &'a str,
    s: f64,
    gamma: f64,
    rho: f64,
    m: usize,
    replications: usize,
    errors: usize,
    fdr: f64,
    fdp_se: f64,
    fdp_min: f64,
    fdp_q1: f64,
    fdp_median: f64,
    fdp_q3: f64,
    fdp_max: f64,
    whisker_low: f64,
    whisker_high: f64,
    outliers: usize,
    mean_power: f64,
    mean_xi: Option<f64>,
}

pub fn write_summary<W: Write>(out: W, summary: &AggregateSummary<f64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for c in &summary.cells {
        let b = &c.boxplot;
        w.serialize(SummaryRow {
            setting_id: c.setting_id,
            procedure: c.procedure.name(),
            s: c.s,
            gamma: c.gamma,
            rho: c.rho,
            m: c.m,
            replications: c.replications,
            errors: c.errors,
            fdr: c.fdr,
            fdp_se: c.fdp_se,
            fdp_min: b.min,
            fdp_q1: b.q1,
            fdp_median: b.median,
            fdp_q3: b.q3,
            fdp_max: b.max,
            whisker_low: b.lower_whisker,
            whisker_high: b.upper_whisker,
            outliers: b.outliers.len(),
            mean_power: c.mean_power,
            mean_xi: c.mean_xi,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_errors<W: Write>(out: W, records: &[ReplicationRecord<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["setting_id", "replication", "seed", "procedure", "error"])?;
    for r in records.iter().filter(|r| !r.is_ok()) {
        w.write_record([
            r.setting_id.to_string(),
            r.replication.to_string(),
            r.seed.to_string(),
            r.procedure.name().to_string(),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_discoveries<W: Write>(out: W, ranking: &GeneRanking<f64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rank", "gene", "z", "statistic"])?;
    for (i, g) in ranking.genes.iter().enumerate() {
        w.write_record([(i + 1).to_string(), g.gene.to_string(), g.z.to_string(), g.statistic.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// One column per procedure, one row per rank; blank where a procedure has
/// fewer discoveries.
pub fn write_topk<W: Write>(out: W, rankings: &[GeneRanking<f64>], k: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["rank".to_string()];
    header.extend(rankings.iter().map(|r| r.procedure.name().to_string()));
    w.write_record(&header)?;
    for i in 0..k {
        let mut row = vec![(i + 1).to_string()];
        row.extend(rankings.iter().map(|r| r.genes.get(i).map_or(String::new(), |g| g.gene.to_string())));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_file(path: &Path, f: impl FnOnce(&mut std::io::BufWriter<std::fs::File>) -> Result<()>) -> Result<()> {
    let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut buf = std::io::BufWriter::new(file);
    f(&mut buf).with_context(|| format!("writing {}", path.display()))?;
    buf.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
