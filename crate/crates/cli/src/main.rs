mod analyze;
mod config;
mod oracle;
mod output;
mod pdc;
mod simulate;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use config::{key_help, KeyTable, KeyValues};

/// Exit status 2: bad configuration, input or I/O. Exit status 3: a
/// computation failed.
#[derive(Debug)]
pub enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }
}

pub type CmdResult = Result<(), Failure>;

pub trait ConfigContext<V> {
    fn config_err(self) -> Result<V, Failure>;
    fn runtime_err(self) -> Result<V, Failure>;
}

impl<V, E: Into<anyhow::Error>> ConfigContext<V> for Result<V, E> {
    fn config_err(self) -> Result<V, Failure> {
        self.map_err(|e| Failure::Config(e.into()))
    }
    fn runtime_err(self) -> Result<V, Failure> {
        self.map_err(|e| Failure::Runtime(e.into()))
    }
}

#[derive(Parser, Debug)]
#[command(name = "fahs", version, about = "False discovery rate control for sparse normal means")]
struct Cli {
    /// Log more (repeat for debug output).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a replicated simulation grid and write records.csv and summary.csv.
    Simulate(SimulateArgs),
    /// Rank discoveries on a gene expression matrix or a z-score file.
    Analyze(AnalyzeArgs),
    /// Prior-data conflict check of a plug-in global scale.
    Pdc(PdcArgs),
    /// Compare Gibbs posterior means with the quadrature posterior mean.
    OracleCheck(OracleArgs),
}

/// Options shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Flat `key = value` config file.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override one config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    /// Grid preset: desk, paper or custom.
    #[arg(long)]
    preset: Option<String>,
    /// Comma-separated procedures, e.g. bh,qvalue,locfdr,ebhs,fbhs,mfahs,efahs,oracle.
    #[arg(long)]
    procedures: Option<String>,
    /// Record wall-clock milliseconds per procedure (makes records.csv run-dependent).
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    common: Common,
    /// Expression matrix CSV or single-column z-score CSV.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Nominal FDR level.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    procedures: Option<String>,
    /// Rows of the top-k comparison table.
    #[arg(long)]
    top_k: Option<usize>,
}

#[derive(Args, Debug)]
pub struct PdcArgs {
    #[command(flatten)]
    common: Common,
    /// Single-column CSV of observations.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Plug-in global scale.
    #[arg(long)]
    xi: Option<f64>,
    /// Tail probability below which a conflict is reported.
    #[arg(long)]
    threshold: Option<f64>,
    /// Equicorrelation; sets σ_jj = 1 and σ_jk = √ρ.
    #[arg(long)]
    rho: Option<f64>,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[command(flatten)]
    common: Common,
}

/// Merges defaults, the config file and flag overrides. Named flags win over
/// `--set`, which wins over the file.
pub fn load_keys(common: &Common, allowed: KeyTable, flags: &[(&str, Option<String>)]) -> Result<KeyValues, Failure> {
    let mut kv = match &common.config {
        Some(p) => KeyValues::read(p, allowed).config_err()?,
        None => KeyValues::default(),
    };
    kv.apply_overrides(&common.set, allowed).config_err()?;
    let shared = [
        ("seed", common.seed.map(|v| v.to_string())),
        ("threads", common.threads.map(|v| v.to_string())),
        ("out", common.out.as_ref().map(|p| p.display().to_string())),
    ];
    for (k, v) in shared.iter().chain(flags) {
        if let Some(v) = v {
            kv.set(k, v.clone(), allowed).config_err()?;
        }
    }
    Ok(kv)
}

/// Runs `f` on a pool of `threads` workers.
pub fn with_pool<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> Result<R, Failure> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().runtime_err()?;
    Ok(pool.install(f))
}

fn command() -> clap::Command {
    let tables: [(&str, KeyTable); 4] = [
        ("simulate", simulate::KEYS),
        ("analyze", analyze::KEYS),
        ("pdc", pdc::KEYS),
        ("oracle-check", oracle::KEYS),
    ];
    let mut cmd = Cli::command();
    for (name, keys) in tables {
        cmd = cmd.mut_subcommand(name, |c| c.after_long_help(key_help(keys)).after_help(key_help(keys)));
    }
    cmd
}

fn dispatch(command: Command) -> CmdResult {
    match command {
        Command::Simulate(a) => simulate::run(a),
        Command::Analyze(a) => analyze::run(a),
        Command::Pdc(a) => pdc::run(a),
        Command::OracleCheck(a) => oracle::run(a),
    }
}

fn main() -> ExitCode {
    let matches = command().get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Config(e) | Failure::Runtime(e)) = &f;
            eprintln!("error: {e:#}");
            ExitCode::from(f.code())
        }
    }
}
