use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "potts-lab", version, about = "Numerical laboratory for the Potts spin glass")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Quenched free energy by exact enumeration
    Exact,
    /// Quenched free energy by parallel tempering and thermodynamic integration
    Quenched,
    /// Thermodynamic integration on one disorder, with per-rung traces
    Mc,
    /// Maximal energy of one disorder, exact or annealed
    GroundState,
    /// Lower and replica-symmetric upper bounds at one (kappa, beta)
    Bounds,
    /// Minimal number of colors for symmetry breaking
    Thresholds,
    /// Symmetry-breaking criterion on a (kappa, beta) grid
    Scan,
    /// Run the acceptance checks
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Auto,
    Exact,
    Anneal,
}

/// Every flag is optional here so that values from a config file can fill
/// the gaps; defaults are applied per command.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Options {
    /// Flat `key = value` file using the long flag names as keys
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long = "N", global = true, value_name = "N")]
    pub n: Option<usize>,
    /// Number of colors; `lo:hi` for scan
    #[arg(long, global = true)]
    pub kappa: Option<String>,
    /// Inverse temperature; `lo:hi:step` for scan
    #[arg(long, global = true)]
    pub beta: Option<String>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Number of disorder samples (or Gaussian samples for bounds)
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Sector half-width; selects a color sector
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Sector proportions as a comma list
    #[arg(long, global = true, value_delimiter = ',', num_args = 1)]
    pub d: Option<Vec<f64>>,
    /// Slope of the lower bound
    #[arg(long = "constant-c", global = true)]
    pub constant_c: Option<f64>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file; `-` for standard output
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Rungs of the tempering ladder
    #[arg(long, global = true)]
    pub rungs: Option<usize>,
    /// Sweeps per rung
    #[arg(long, global = true)]
    pub sweeps: Option<usize>,
    #[arg(long = "burn-in", global = true)]
    pub burn_in: Option<usize>,
    #[arg(long = "sweeps-per-exchange", global = true)]
    pub sweeps_per_exchange: Option<usize>,
    /// Annealing restarts
    #[arg(long, global = true)]
    pub restarts: Option<usize>,
    /// Maximal number of enumerated configurations
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub method: Option<Method>,
    /// Criteria to run (verify), comma separated
    #[arg(long, global = true, value_delimiter = ',', num_args = 1)]
    pub criteria: Option<Vec<u32>>,
}

/// Locates `--config` in raw arguments without a full parse.
fn config_path(args: &[String]) -> Option<PathBuf> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

/// Turns a config file into flag tokens.
pub fn config_tokens(path: &Path) -> Result<Vec<String>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("config: cannot read {}: {e}", path.display()))?;
    let mut tokens = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config: line {} is not `key = value`", lineno + 1))?;
        let key = key.trim().trim_start_matches("--");
        if key == "config" {
            return Err(format!("config: line {}: nested config files are not supported", lineno + 1));
        }
        tokens.push(format!("--{key}"));
        tokens.push(value.trim().to_string());
    }
    Ok(tokens)
}

/// Parses the command line, placing config-file values before the explicit
/// flags so that the latter win.
pub fn parse(args: Vec<String>) -> Result<Cli, clap::Error> {
    let Some(path) = config_path(&args) else {
        return Cli::try_parse_from(args);
    };
    let tokens = match config_tokens(&path) {
        Ok(t) => t,
        Err(msg) => return Err(clap::Error::raw(clap::error::ErrorKind::InvalidValue, msg + "\n")),
    };
    let mut merged = Vec::with_capacity(args.len() + tokens.len());
    let mut rest = args.into_iter();
    merged.extend(rest.next());
    merged.extend(tokens);
    merged.extend(rest);
    Cli::try_parse_from(merged)
}
