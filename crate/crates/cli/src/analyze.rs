use std::io::Write as _;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use fahs::realdata::{rank_genes, read_analysis_input, AnalysisInput, GeneRanking};
use fahs::{ObservationVector, Procedure, ProcedureConfig};

use crate::config::{self, KeyTable, KeyValues};
use crate::output::{write_discoveries, write_file, write_topk};
use crate::{load_keys, AnalyzeArgs, CmdResult, ConfigContext, Failure};

pub const KEYS: KeyTable = &[
    ("input", "CSV file: genes × subjects with a header of group labels, or one z-score per line"),
    ("gamma", "nominal FDR level (default 0.1)"),
    ("procedures", "comma-separated procedures (default bh,mfahs,efahs,locfdr)"),
    ("seed", "sampler seed (default 1)"),
    ("top_k", "rows of the comparison table (default 10)"),
    ("out", "directory for discoveries_<procedure>.csv, topk.csv and zscores.csv (default: print only)"),
    ("threads", "accepted for symmetry with simulate; procedures run one after another"),
    ("burn_in", "Gibbs burn-in sweeps (default 1000)"),
    ("samples", "Gibbs sweeps kept after burn-in (default 5000)"),
    ("bins", "histogram bins of the two-groups density fit (default 120)"),
    ("df", "spline degrees of freedom of the two-groups density fit (default 7)"),
    ("null", "two-groups null: theoretical or empirical (default theoretical)"),
];

pub const DEFAULT_PROCEDURES: [Procedure; 4] = [Procedure::Bh, Procedure::Mfahs, Procedure::Efahs, Procedure::Locfdr];

pub struct AnalyzeConfig {
    pub input: PathBuf,
    pub gamma: f64,
    pub procedures: Vec<Procedure>,
    pub seed: u64,
    pub top_k: usize,
    pub out: Option<PathBuf>,
    pub procedure: ProcedureConfig,
}

pub fn build(kv: &KeyValues) -> Result<AnalyzeConfig> {
    let input = kv.raw("input").map(PathBuf::from).ok_or_else(|| anyhow!("`input` is required"))?;
    let gamma = kv.get_or("gamma", 0.1)?;
    fahs::error::check_gamma(gamma)?;
    let procedures = match kv.raw("procedures") {
        Some(list) => Procedure::parse_list(list)?,
        None => DEFAULT_PROCEDURES.to_vec(),
    };
    if procedures.contains(&Procedure::Oracle) {
        bail!("the oracle procedure needs ground truth and is not available for real data");
    }
    config::threads(kv)?;
    Ok(AnalyzeConfig {
        input,
        gamma,
        procedures,
        seed: kv.get_or("seed", 1)?,
        top_k: kv.get_or("top_k", 10)?,
        out: kv.raw("out").map(PathBuf::from),
        procedure: config::procedure_config(kv)?,
    })
}

pub fn run(args: AnalyzeArgs) -> CmdResult {
    let (rankings, top_k) = evaluate(args)?;
    print_table(&rankings, top_k);
    Ok(())
}

/// Runs the analysis and writes the output tables; returns the rankings.
pub fn evaluate(args: AnalyzeArgs) -> Result<(Vec<GeneRanking<f64>>, usize), Failure> {
    let flags = [
        ("input", args.input.as_ref().map(|p| p.display().to_string())),
        ("gamma", args.gamma.map(|g| g.to_string())),
        ("procedures", args.procedures.clone()),
        ("top_k", args.top_k.map(|k| k.to_string())),
    ];
    let kv = load_keys(&args.common, KEYS, &flags)?;
    let cfg = build(&kv).config_err()?;
    let text = std::fs::read_to_string(&cfg.input)
        .with_context(|| format!("reading {}", cfg.input.display()))
        .config_err()?;
    let input = read_analysis_input::<f64>(&text)
        .with_context(|| format!("in {}", cfg.input.display()))
        .config_err()?;
    let z = input.z_scores().runtime_err()?;
    log::info!("{} z-scores", z.len());

    let mut rankings: Vec<GeneRanking<f64>> = Vec::new();
    let mut failures = Vec::new();
    for &p in &cfg.procedures {
        match rank_genes(&z, &[p], cfg.gamma, cfg.seed, &cfg.procedure) {
            Ok(mut r) => rankings.append(&mut r),
            Err(e) => {
                log::warn!("{p} failed: {e}");
                failures.push(format!("{p}: {e}"));
            }
        }
    }
    if rankings.is_empty() {
        return Err(Failure::Runtime(anyhow!("every procedure failed: {}", failures.join("; "))));
    }

    if let Some(out) = &cfg.out {
        write_outputs(out, &input, &z, &rankings, cfg.top_k).config_err()?;
    }
    Ok((rankings, cfg.top_k))
}

fn write_outputs(
    out: &std::path::Path,
    input: &AnalysisInput<f64>,
    z: &ObservationVector<f64>,
    rankings: &[GeneRanking<f64>],
    top_k: usize,
) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    for r in rankings {
        write_file(&out.join(format!("discoveries_{}.csv", r.procedure.name())), |w| write_discoveries(w, r))?;
    }
    write_file(&out.join("topk.csv"), |w| write_topk(w, rankings, top_k))?;
    if matches!(input, AnalysisInput::Matrix(_)) {
        write_file(&out.join("zscores.csv"), |w| {
            writeln!(w, "z")?;
            for v in z.values() {
                writeln!(w, "{v}")?;
            }
            Ok(())
        })?;
    }
    Ok(())
}

fn print_table(rankings: &[GeneRanking<f64>], k: usize) {
    let mut line = format!("{:>4}", "rank");
    for r in rankings {
        line.push_str(&format!(" {:>8}", r.procedure.name()));
    }
    println!("{line}");
    for i in 0..k {
        let mut line = format!("{:>4}", i + 1);
        for r in rankings {
            line.push_str(&format!(" {:>8}", r.genes.get(i).map_or(String::new(), |g| g.gene.to_string())));
        }
        println!("{line}");
    }
    let mut line = format!("{:>4}", "R");
    for r in rankings {
        line.push_str(&format!(" {:>8}", r.rejections));
    }
    println!("{line}");
}
