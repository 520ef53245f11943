use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use htype_core::CatalogName;

pub const DEFAULT_SEED: u64 = 20240917;

#[derive(Debug, Parser)]
#[command(name = "htype", version, about = "General H-type algebras: validation, geodesics, curvature")]
pub struct Cli {
    /// Worker threads for parallel library routines.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the JSON spec of a catalog algebra.
    Catalog(CatalogArgs),
    /// Check the H-type identities of an algebra.
    Validate(ValidateArgs),
    /// Sample a geodesic from the identity.
    Geodesic(GeodesicArgs),
    /// Ricci tensor, scalar curvature and sample sectional curvatures.
    Curvature(CurvatureArgs),
    /// Search for a composition of two binary quadratic forms.
    ComposeSearch(SearchArgs),
}

/// `name:n`, e.g. `heis_split:2`.
#[derive(Debug, Clone)]
pub struct CatalogRef {
    pub name: CatalogName,
    pub n: usize,
}

pub fn parse_catalog_ref(s: &str) -> Result<CatalogRef, String> {
    let (name, n) = s.split_once(':').unwrap_or((s, "1"));
    let name = name.parse::<CatalogName>().map_err(|e| e.to_string())?;
    let n = n.parse::<usize>().map_err(|_| format!("invalid block count `{n}`"))?;
    if n == 0 {
        return Err("block count must be at least 1".into());
    }
    Ok(CatalogRef { name, n })
}

pub fn parse_vector(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|x| {
            let v: f64 = x.trim().parse().map_err(|_| format!("invalid number `{}`", x.trim()))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("non-finite number `{}`", x.trim()))
            }
        })
        .collect()
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Catalog algebra `name:n` (heis, heis_split, quat, quat_split).
    #[arg(long, value_parser = parse_catalog_ref)]
    pub catalog: Option<CatalogRef>,
    /// JSON algebra spec with fields n, nu_h, m, nu_v, B and optional label.
    #[arg(long)]
    pub algebra: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Validation {
    /// Sampled vectors per identity.
    #[arg(long, default_value_t = 256)]
    pub trials: usize,
    /// Residual threshold for every check.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct CatalogArgs {
    /// Catalog algebra `name:n`.
    #[arg(value_parser = parse_catalog_ref)]
    pub entry: CatalogRef,
    /// Output file; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub validation: Validation,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    /// Closed form with quadrature for the vertical part.
    Closed,
    /// Runge–Kutta integration of the Hamiltonian system.
    Rk4,
}

#[derive(Debug, Args)]
pub struct GeodesicArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub validation: Validation,
    /// Initial horizontal velocity, comma separated.
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    pub v0: ::std::vec::Vec<f64>,
    /// Vertical momentum, comma separated.
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    pub theta: ::std::vec::Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub s_max: f64,
    /// Number of equal intervals on [0, s_max]; the CSV has samples + 1 rows.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, value_enum, default_value_t = Method::Closed)]
    pub method: Method,
    /// Largest RK4 step.
    #[arg(long, default_value_t = 1e-4)]
    pub dt: f64,
    /// Trajectory CSV; the JSON sidecar is written to `<out>.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CurvatureArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub validation: Validation,
    /// Random planes to classify.
    #[arg(long, default_value_t = 16)]
    pub planes: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Index of φ on ℝ² (0, 1 or 2).
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=2))]
    pub phi_index: u8,
    /// Index of λ on ℝ² (0, 1 or 2).
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=2))]
    pub lambda_index: u8,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub restarts: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
