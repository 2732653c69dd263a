use std::path::PathBuf;

use anyhow::{anyhow, bail, Result};
use fahs::sim::{aggregate, desk_preset, grid, paper_preset, run_grid, GridOptions, SimulationSetting, Standardize};
use fahs::Procedure;

use crate::config::{self, KeyTable, KeyValues};
use crate::output::{write_errors, write_file, write_records, write_summary};
use crate::{load_keys, svg, with_pool, CmdResult, ConfigContext, Failure, SimulateArgs};

pub const KEYS: KeyTable = &[
    ("preset", "desk (m=2000, 30 reps, s 0.05/0.2/0.5, gamma 0.1/0.2, rho 0), paper (m=10000, 100 reps, 144 settings) or custom"),
    ("m", "number of means per data set"),
    ("s", "comma-separated signal proportions"),
    ("gamma", "comma-separated nominal FDR levels"),
    ("rho", "comma-separated noise equicorrelations"),
    ("replications", "replications per setting"),
    ("psi", "slab standard deviation before standardizing (default 5)"),
    ("snr", "signal-to-noise multiplier after standardizing (default 3)"),
    ("standardize", "all or nonzero: which entries set the slab's sample sd (default all)"),
    ("procedures", "comma-separated: bh,qvalue,locfdr,ebhs,fbhs,mfahs,efahs,oracle (default all)"),
    ("seed", "base seed (default 1)"),
    ("threads", "worker threads (default: available cores); output does not depend on it"),
    ("out", "output directory (default out)"),
    ("burn_in", "Gibbs burn-in sweeps (default 1000)"),
    ("samples", "Gibbs sweeps kept after burn-in (default 5000)"),
    ("bins", "histogram bins of the two-groups density fit (default 120)"),
    ("df", "spline degrees of freedom of the two-groups density fit (default 7)"),
    ("null", "two-groups null: theoretical or empirical (default theoretical)"),
    ("timing", "true to fill wall_ms (default false)"),
    ("pdc", "true to attach the prior-data conflict tail probability to FAHS records (default true)"),
    ("svg", "true to write boxplots.svg (default true)"),
];

pub struct SimulateConfig {
    pub settings: Vec<SimulationSetting<f64>>,
    pub options: GridOptions,
    pub threads: usize,
    pub out: PathBuf,
    pub svg: bool,
}

pub fn build(kv: &KeyValues) -> Result<SimulateConfig> {
    let seed: u64 = kv.get_or("seed", 1)?;
    let procedures = match kv.raw("procedures") {
        Some(list) => Procedure::parse_list(list)?,
        None => Procedure::ALL.to_vec(),
    };
    let preset = kv.get_or::<String>("preset", "desk".into())?;
    let base: Vec<SimulationSetting<f64>> = match preset.as_str() {
        "desk" => desk_preset(seed, &procedures),
        "paper" => paper_preset(seed, &procedures),
        "custom" => Vec::new(),
        other => bail!("preset must be desk, paper or custom, got `{other}`"),
    };
    let distinct = |f: fn(&SimulationSetting<f64>) -> f64| {
        let mut v: Vec<f64> = Vec::new();
        for st in &base {
            if !v.contains(&f(st)) {
                v.push(f(st));
            }
        }
        (!v.is_empty()).then_some(v)
    };
    let required = |key: &str| anyhow!("`{key}` is required with preset custom");
    let m = match kv.get::<usize>("m")? {
        Some(m) => m,
        None => base.first().map(|s| s.m).ok_or_else(|| required("m"))?,
    };
    let s = kv.list::<f64>("s")?.or_else(|| distinct(|x| x.s)).ok_or_else(|| required("s"))?;
    let gamma = kv.list::<f64>("gamma")?.or_else(|| distinct(|x| x.gamma)).ok_or_else(|| required("gamma"))?;
    let rho = kv.list::<f64>("rho")?.or_else(|| distinct(|x| x.rho)).ok_or_else(|| required("rho"))?;
    let replications = match kv.get::<usize>("replications")? {
        Some(r) => r,
        None => base.first().map(|s| s.replications).ok_or_else(|| required("replications"))?,
    };
    let psi = kv.get_or("psi", fahs::sim::DEFAULT_PSI)?;
    let snr = kv.get_or("snr", fahs::sim::DEFAULT_SNR)?;
    let standardize: Standardize = kv.get_or("standardize", Standardize::All)?;

    let mut settings = grid(m, &s, &gamma, &rho, replications, seed, &procedures);
    for st in &mut settings {
        st.psi = psi;
        st.snr = snr;
        st.standardize = standardize;
        st.validate()?;
    }
    let options = GridOptions {
        procedure: config::procedure_config(kv)?,
        timing: kv.bool_or("timing", false)?,
        pdc: kv.bool_or("pdc", true)?,
    };
    Ok(SimulateConfig {
        settings,
        options,
        threads: config::threads(kv)?,
        out: PathBuf::from(kv.get_or::<String>("out", "out".into())?),
        svg: kv.bool_or("svg", true)?,
    })
}

pub fn run(args: SimulateArgs) -> CmdResult {
    let flags = [
        ("preset", args.preset.clone()),
        ("procedures", args.procedures.clone()),
        ("timing", args.timing.then(|| "true".to_string())),
    ];
    let kv = load_keys(&args.common, KEYS, &flags)?;
    let cfg = build(&kv).config_err()?;
    let total: usize = cfg.settings.iter().map(|s| s.replications * s.procedures.len()).sum();
    log::info!("{} settings, {total} records, {} threads", cfg.settings.len(), cfg.threads);

    std::fs::create_dir_all(&cfg.out).map_err(|e| Failure::Config(anyhow!("creating {}: {e}", cfg.out.display())))?;
    let records = with_pool(cfg.threads, || run_grid(&cfg.settings, &cfg.options))?;
    let summary = aggregate(&records);

    write_file(&cfg.out.join("records.csv"), |w| write_records(w, &records)).config_err()?;
    write_file(&cfg.out.join("summary.csv"), |w| write_summary(w, &summary)).config_err()?;
    if cfg.svg {
        let text = svg::boxplots(&summary);
        std::fs::write(cfg.out.join("boxplots.svg"), text).config_err()?;
    }
    let failed = records.iter().filter(|r| !r.is_ok()).count();
    if failed > 0 {
        write_file(&cfg.out.join("errors.csv"), |w| write_errors(w, &records)).config_err()?;
        return Err(Failure::Runtime(anyhow!(
            "{failed} of {} records failed; see errors.csv (other records were written)",
            records.len()
        )));
    }
    for c in &summary.cells {
        println!(
            "setting {:>3} {:<7} s={:<5} gamma={:<5} rho={:<4} FDR={:.4} (se {:.4}) power={:.4}",
            c.setting_id,
            c.procedure.name(),
            c.s,
            c.gamma,
            c.rho,
            c.fdr,
            c.fdp_se,
            c.mean_power
        );
    }
    Ok(())
}
