use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::CliError;
use crate::profile::Params;

/// Output directory used when `--out` is absent.
pub const OUT_ENV: &str = "PGL_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    Shooting,
    Variational,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Both,
}

impl Format {
    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Exponent p > 2 (comma-separated values allowed).
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<f64>,
    /// Comma-separated exponents, e.g. 20,50,100.
    #[arg(long = "p-list", value_delimiter = ',')]
    pub p_list: Option<Vec<f64>>,
    /// Truncation radius (default depends on p).
    #[arg(long = "R")]
    pub radius: Option<f64>,
    /// Grid nodes (default 4001, or 2000 for spectra).
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long, value_enum, default_value_t = SolverChoice::Shooting)]
    pub solver: SolverChoice,
    /// Shooting integration tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Variational stopping threshold on the scaled gradient.
    #[arg(long = "var-tol", default_value_t = 1e-8)]
    pub var_tol: f64,
    /// Fourier modes, as `a..b` (inclusive) or a comma list.
    #[arg(long, default_value = "1..8")]
    pub modes: String,
    /// Eigenpairs per mode operator.
    #[arg(long, default_value_t = 6)]
    pub eigenpairs: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    pub format: Format,
}

/// Validated run configuration, serialized into every artifact.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub p_values: Vec<f64>,
    pub radius: Option<f64>,
    pub nodes: usize,
    pub solver: SolverChoice,
    pub tol: f64,
    pub var_tol: f64,
    pub modes: Vec<usize>,
    pub eigenpairs: usize,
    pub format: Format,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub workers: Option<usize>,
}

pub fn parse_modes(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Usage(format!("invalid mode range {s:?}; expected e.g. 1..8 or 1,2,5"));
    let modes: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        (a..=b).collect()
    } else {
        s.split(',').map(|t| t.trim().parse()).collect::<Result<_, _>>().map_err(|_| bad())?
    };
    if modes.is_empty() || modes.contains(&0) {
        return Err(bad());
    }
    Ok(modes)
}

impl RunConfig {
    pub fn from_args(command: &str, args: &RunArgs, default_nodes: usize) -> Result<Self, CliError> {
        let mut p_values = Vec::new();
        p_values.extend(args.p.iter().copied());
        if let Some(list) = &args.p_list {
            p_values.extend(list.iter().copied());
        }
        if p_values.is_empty() {
            return Err(CliError::Usage("no exponent given; use --p or --p-list".into()));
        }
        for &p in &p_values {
            Params::new(p).map_err(|e| CliError::Usage(e.to_string()))?;
        }
        if let Some(r) = args.radius {
            if !(r > 1.0 && r.is_finite()) {
                return Err(CliError::Usage(format!("--R must exceed 1 (got {r})")));
            }
        }
        let nodes = args.nodes.unwrap_or(default_nodes);
        if nodes < 50 {
            return Err(CliError::Usage(format!("--nodes must be at least 50 (got {nodes})")));
        }
        for (name, t) in [("--tol", args.tol), ("--var-tol", args.var_tol)] {
            if !(t > 0.0 && t <= 1e-3) {
                return Err(CliError::Usage(format!("{name} must lie in (0, 1e-3] (got {t})")));
            }
        }
        if args.workers == Some(0) {
            return Err(CliError::Usage("--workers must be positive".into()));
        }
        if args.eigenpairs == 0 {
            return Err(CliError::Usage("--eigenpairs must be positive".into()));
        }
        let out = args
            .out
            .clone()
            .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        Ok(RunConfig {
            command: command.into(),
            p_values,
            radius: args.radius,
            nodes,
            solver: args.solver,
            tol: args.tol,
            var_tol: args.var_tol,
            modes: parse_modes(&args.modes)?,
            eigenpairs: args.eigenpairs,
            format: args.format,
            out,
            workers: args.workers,
        })
    }

    /// SHA-256 of the serialized configuration.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}
