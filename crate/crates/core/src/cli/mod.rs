//! Command-line front end: `heat`, `solve`, `scan`, `verify` and `export`.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration or usage error,
//! 3 Picard iteration failed to contract, 4 a checked tolerance was missed.

pub mod config;
pub mod output;
mod commands;

use crate::fields::{Cutoff, Grid, GridSpec, SpaceParams};
use clap::{Parser, Subcommand};
pub use config::{Config, ConfigError};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "asymflow", version, about = "Asymptotic-space heat and Navier–Stokes experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Seed for randomised probes.
    #[arg(long, global = true, default_value_t = crate::navier_stokes::DEFAULT_PROBE_SEED)]
    pub seed: u64,
    /// Override `grid.nx`.
    #[arg(long = "grid-nx", global = true)]
    pub grid_nx: Option<usize>,
    /// Override `grid.half_width`.
    #[arg(long = "box-L", global = true)]
    pub box_l: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evolve a field under the heat semigroup.
    Heat,
    /// Solve Navier–Stokes on the real axis or a complex ray.
    Solve,
    /// Fit resolvent or smoothing exponents.
    Scan {
        /// `smoothing` or `sectorial`; falls back to `scan.kind`.
        kind: Option<String>,
    },
    /// Run acceptance experiments (all when none are named).
    Verify { criteria: Vec<String> },
    /// Convert an ASYF snapshot to CSV and re-serialise it.
    Export { input: PathBuf },
}

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Usage(String),
    Io(String),
    NoContraction(String),
    Tolerance(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::NoContraction(_) => 3,
            CliError::Tolerance(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::NoContraction(m) => write!(f, "no contraction: {m}"),
            CliError::Tolerance(m) => write!(f, "tolerance violated: {m}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// One manifest per run, written as `manifest.json`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub format_version: u32,
    pub command: String,
    pub config: String,
    pub seed: u64,
    pub grid: Option<GridSpec>,
    pub params: Option<SpaceParams>,
    pub constants: Option<crate::navier_stokes::ConstantEstimates>,
    pub invariants: Option<crate::navier_stokes::InvariantReport>,
    /// Largest remainder magnitude on the outer grid ring, a proxy for the
    /// error of truncating the plane to the box.
    pub box_edge_remainder: Option<f64>,
    pub ledger: Vec<String>,
    pub results: serde_json::Value,
    pub wall_clock_seconds: f64,
    pub exit_code: i32,
}

impl RunManifest {
    pub fn new(command: &str, cfg: &Config, seed: u64) -> Self {
        Self {
            format_version: MANIFEST_VERSION,
            command: command.to_string(),
            config: cfg.source.clone(),
            seed,
            grid: None,
            params: None,
            constants: None,
            invariants: None,
            box_edge_remainder: None,
            ledger: vec![],
            results: serde_json::Value::Null,
            wall_clock_seconds: 0.0,
            exit_code: 0,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Io(e.to_string()))?;
        std::fs::write(dir.join("manifest.json"), text + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| CliError::Io(e.to_string()))
    }
}

/// Grid from `[grid]`, with command-line overrides taking precedence.
pub fn grid_from(cfg: &Config, cli: &Cli) -> Result<Arc<Grid>, CliError> {
    let base = GridSpec::default();
    let half_width = match cli.box_l {
        Some(v) => v,
        None => cfg.require_float("grid", "half_width")?,
    };
    let nx = match cli.grid_nx {
        Some(v) => v,
        None => cfg.count("grid", "nx")?.ok_or_else(|| cfg.require_int("grid", "nx").unwrap_err())?,
    };
    if !nx.is_power_of_two() || !(8..=4096).contains(&nx) {
        return Err(if cli.grid_nx.is_some() {
            CliError::Usage(format!("--grid-nx must be a power of two in [8, 4096], got {nx}"))
        } else {
            cfg.invalid("grid", "nx", format!("must be a power of two in [8, 4096], got {nx}")).into()
        });
    }
    let cutoff = match cfg.word("grid", "cutoff").unwrap_or("gamma") {
        "bump" => {
            let lo = cfg.float("grid", "bump_inner").unwrap_or(1.0);
            let hi = cfg.float("grid", "bump_outer").unwrap_or(2.0);
            if !(0.0 < lo && lo < hi) {
                return Err(cfg.invalid("grid", "bump_outer", format!("need 0 < bump_inner < bump_outer, got {lo} and {hi}")).into());
            }
            Cutoff::Bump { r_lo: lo, r_hi: hi }
        }
        _ => {
            let (order0, scale0) = match base.cutoff {
                Cutoff::Gamma { order, scale } => (order, scale),
                Cutoff::Bump { .. } => (12, 1.5),
            };
            let order = cfg.count("grid", "cutoff_order")?.unwrap_or(order0 as usize);
            let scale = cfg.float("grid", "cutoff_scale").unwrap_or(scale0);
            if order == 0 || order > 64 {
                return Err(cfg.invalid("grid", "cutoff_order", "must be in 1..=64").into());
            }
            if scale <= 0.0 {
                return Err(cfg.invalid("grid", "cutoff_scale", "must be positive").into());
            }
            Cutoff::Gamma { order: order as u32, scale }
        }
    };
    if !(half_width > cutoff.outer_radius()) {
        let msg = format!("box half-width {half_width} must exceed the cutoff transition radius {:.3}", cutoff.outer_radius());
        return Err(if cli.box_l.is_some() { CliError::Usage(msg) } else { cfg.invalid("grid", "half_width", msg).into() });
    }
    let m_max = cfg.count("grid", "m_max")?.unwrap_or(base.m_max);
    let k_max = cfg.count("grid", "k_max")?.unwrap_or(base.k_max as usize) as u32;
    Ok(GridSpec { half_width, nx, cutoff, m_max, k_max }.build())
}

/// Space indices from `[space]`, defaulting to `fallback`.
pub fn params_from(cfg: &Config, fallback: SpaceParams) -> Result<SpaceParams, CliError> {
    let get = |key: &str, d: u32| -> Result<u32, CliError> {
        match cfg.int("space", key) {
            None => Ok(d),
            Some(v) if (0..=32).contains(&v) => Ok(v as u32),
            Some(v) => Err(cfg.invalid("space", key, format!("must be in 0..=32, got {v}")).into()),
        }
    };
    let p = SpaceParams::new(get("m", fallback.m)?, get("n", fallback.n)?, get("N", fallback.big_n)?, cfg.int("space", "ell").map(|v| v as i32).unwrap_or(fallback.ell));
    p.validate().map_err(|e| CliError::Config(ConfigError { line: cfg.line_of("space", "N"), key: Some("space".into()), message: e.to_string() }))?;
    Ok(p)
}

fn load_config(cli: &Cli, required: bool) -> Result<Config, CliError> {
    match &cli.config {
        Some(p) => Ok(Config::load(p)?),
        None if required => Err(CliError::Usage("--config <path> is required for this command".into())),
        None => Ok(Config::default()),
    }
}

/// Parse arguments and run; returns the process exit code. Messages go to
/// stdout (progress) and stderr (errors).
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("asymflow: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let cfg = load_config(cli, !matches!(cli.command, Command::Verify { .. } | Command::Export { .. }))?;
    std::fs::create_dir_all(&cli.out)?;
    match &cli.command {
        Command::Heat => commands::heat(cli, &cfg),
        Command::Solve => commands::solve(cli, &cfg),
        Command::Scan { kind } => commands::scan(cli, &cfg, kind.as_deref()),
        Command::Verify { criteria } => commands::verify(cli, &cfg, criteria),
        Command::Export { input } => commands::export(cli, input),
    }
}
