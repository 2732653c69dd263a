use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use fahs::fahs::{xi_efahs_capped, xi_mfahs, EFAHS_XI_CAP};
use fahs::pdc::{pdc_check, pdc_check_averaged, NoiseCovariance, DEFAULT_THRESHOLD};
use fahs::pvalue::{bh_procedure, PValueVector};
use fahs::realdata::read_zscores_csv;
use fahs::ObservationVector;
use serde::Serialize;

use crate::config::{KeyTable, KeyValues};
use crate::{load_keys, CmdResult, ConfigContext, Failure, PdcArgs};

pub const KEYS: KeyTable = &[
    ("input", "CSV with one observation per line (optional header)"),
    ("xi", "plug-in global scale; alternatively set `variant`"),
    ("variant", "mfahs or efahs: derive xi from the BH rejection count at `gamma`"),
    ("gamma", "level of the BH step when `variant` is set (default 0.1)"),
    ("sigma_diag", "noise covariance diagonal entry"),
    ("sigma_offdiag", "noise covariance off-diagonal entry"),
    ("rho", "equicorrelation; shorthand for sigma_diag = 1, sigma_offdiag = sqrt(rho)"),
    ("threshold", "tail probability below which a conflict is reported (default 0.05)"),
    ("seed", "seed of the local-scale draw (default 1)"),
    ("draws", "average the tail over this many local-scale draws (default 1: a single draw)"),
    ("threads", "accepted for symmetry with simulate; unused"),
    ("out", "accepted for symmetry with simulate; unused"),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XiSource {
    Fixed(f64),
    Mfahs(f64),
    Efahs(f64),
}

pub struct PdcConfig {
    pub input: PathBuf,
    pub xi: XiSource,
    pub cov: NoiseCovariance<f64>,
    pub threshold: f64,
    pub seed: u64,
    pub draws: usize,
}

pub fn build(kv: &KeyValues) -> Result<PdcConfig> {
    let input = kv.raw("input").map(PathBuf::from).ok_or_else(|| anyhow!("`input` is required"))?;
    let gamma = kv.get_or("gamma", 0.1)?;
    let xi = match (kv.get::<f64>("xi")?, kv.raw("variant")) {
        (Some(_), Some(_)) => bail!("set either `xi` or `variant`, not both"),
        (Some(x), None) if x > 0.0 && x.is_finite() => XiSource::Fixed(x),
        (Some(x), None) => bail!("xi must be positive, got {x}"),
        (None, Some("mfahs")) => XiSource::Mfahs(gamma),
        (None, Some("efahs")) => XiSource::Efahs(gamma),
        (None, Some(v)) => bail!("variant must be mfahs or efahs, got `{v}`"),
        (None, None) => bail!("one of `xi` or `variant` is required"),
    };
    if !matches!(xi, XiSource::Fixed(_)) {
        fahs::error::check_gamma(gamma)?;
    }
    let cov = match (kv.get::<f64>("rho")?, kv.get::<f64>("sigma_diag")?, kv.get::<f64>("sigma_offdiag")?) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => bail!("set either `rho` or the sigma entries, not both"),
        (Some(r), None, None) if (0.0..1.0).contains(&r) => NoiseCovariance::equicorrelated(r),
        (Some(r), None, None) => bail!("rho must lie in [0, 1), got {r}"),
        (None, Some(d), Some(o)) if d > 0.0 && o >= 0.0 && d.is_finite() && o.is_finite() => {
            NoiseCovariance { sigma_diag: d, sigma_offdiag: o }
        }
        (None, Some(_), Some(_)) => bail!("sigma_diag must be positive and sigma_offdiag non-negative"),
        _ => bail!("noise covariance missing: set `rho` or both `sigma_diag` and `sigma_offdiag`"),
    };
    let threshold = kv.get_or("threshold", DEFAULT_THRESHOLD)?;
    if !(0.0..1.0).contains(&threshold) {
        bail!("threshold must lie in [0, 1), got {threshold}");
    }
    let draws = kv.get_or("draws", 1usize)?;
    if draws == 0 {
        bail!("draws must be at least 1");
    }
    Ok(PdcConfig {
        input,
        xi,
        cov,
        threshold,
        seed: kv.get_or("seed", 1)?,
        draws,
    })
}

#[derive(Debug, Serialize)]
pub struct PdcLine {
    pub m: usize,
    pub xi: f64,
    pub ybar: f64,
    pub predictive_sd: f64,
    pub tail_probability: f64,
    pub threshold: f64,
    pub conflict: bool,
    pub draws: usize,
}

fn resolve_xi(y: &ObservationVector<f64>, xi: XiSource) -> Result<f64> {
    let bh = |gamma| bh_procedure(&PValueVector::from_observations(y), gamma).map(|d| d.rejections());
    Ok(match xi {
        XiSource::Fixed(x) => x,
        XiSource::Mfahs(g) => xi_mfahs(bh(g)?, y.len()),
        XiSource::Efahs(g) => xi_efahs_capped(bh(g)?, y.len(), 1.0, EFAHS_XI_CAP),
    })
}

pub fn run(args: PdcArgs) -> CmdResult {
    let line = evaluate(args)?;
    println!("{}", serde_json::to_string(&line).runtime_err()?);
    Ok(())
}

pub fn evaluate(args: PdcArgs) -> Result<PdcLine, Failure> {
    let flags = [
        ("input", args.input.as_ref().map(|p| p.display().to_string())),
        ("xi", args.xi.map(|v| v.to_string())),
        ("threshold", args.threshold.map(|v| v.to_string())),
        ("rho", args.rho.map(|v| v.to_string())),
    ];
    let kv = load_keys(&args.common, KEYS, &flags)?;
    let cfg = build(&kv).config_err()?;
    let file = std::fs::File::open(&cfg.input)
        .with_context(|| format!("opening {}", cfg.input.display()))
        .config_err()?;
    let y = read_zscores_csv::<f64, _>(file)
        .with_context(|| format!("in {}", cfg.input.display()))
        .config_err()?;
    let xi = resolve_xi(&y, cfg.xi).runtime_err()?;
    let result = if cfg.draws == 1 {
        pdc_check(&y, xi, cfg.cov, cfg.threshold, cfg.seed)
    } else {
        pdc_check_averaged(&y, xi, cfg.cov, cfg.threshold, cfg.seed, cfg.draws)
    }
    .runtime_err()?;
    Ok(PdcLine {
        m: y.len(),
        xi,
        ybar: result.ybar,
        predictive_sd: result.predictive_sd,
        tail_probability: result.tail_probability,
        threshold: result.threshold,
        conflict: result.conflict,
        draws: cfg.draws,
    })
}
