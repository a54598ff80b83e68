//! Run configuration: JSON config file plus flag overrides (flags win).

use radial_bv::{EnergyDensity, PsiFn, RadialProblem};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use std::sync::Arc;

use crate::CliError;

/// Density description as it appears in config files and summaries.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DensityConfig {
    PhiMu { mu: f64 },
    GTildeK { k: f64 },
    MinimalSurface,
    /// Demonstration member of the custom family: `g'' = psi` with
    /// `psi(t) = ((1+t)^-mu + (1+t)^-mu_bar) / 2`, evaluated by cached
    /// quadrature and an estimated recession slope.
    Custom { mu: f64, mu_bar: f64 },
}

impl DensityConfig {
    pub fn build(&self) -> radial_bv::Result<EnergyDensity> {
        match *self {
            DensityConfig::PhiMu { mu } => EnergyDensity::phi_mu(mu),
            DensityConfig::GTildeK { k } => EnergyDensity::g_tilde_k(k),
            DensityConfig::MinimalSurface => Ok(EnergyDensity::minimal_surface()),
            DensityConfig::Custom { mu, mu_bar } => {
                let psi: PsiFn = Arc::new(move |t: f64| {
                    0.5 * ((1.0 + t).powf(-mu) + (1.0 + t).powf(-mu_bar))
                });
                EnergyDensity::custom_psi(psi, mu, mu_bar)
            }
        }
    }
}

/// Raw config file contents.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub density: Option<DensityConfig>,
    pub rho1: Option<f64>,
    pub rho2: Option<f64>,
    pub m1: Option<f64>,
    pub m2: Option<f64>,
    pub cells: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub formats: Option<Vec<String>>,
    pub sweep_count: Option<usize>,
    pub deltas: Option<Vec<f64>>,
}

/// Flag values collected by clap; `None` defers to the config file.
#[derive(Debug, Clone, clap::Args)]
pub struct RunArgs {
    /// JSON config file; flags override its fields
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Density family: phi-mu | g-tilde-k | minimal-surface | custom
    #[arg(long)]
    pub density: Option<String>,
    /// Ellipticity exponent for phi-mu and custom
    #[arg(long)]
    pub mu: Option<f64>,
    /// Exponent for g-tilde-k
    #[arg(long)]
    pub k: Option<f64>,
    /// Upper ellipticity exponent for custom
    #[arg(long)]
    pub mu_bar: Option<f64>,
    #[arg(long)]
    pub rho1: Option<f64>,
    #[arg(long)]
    pub rho2: Option<f64>,
    #[arg(long)]
    pub m1: Option<f64>,
    #[arg(long)]
    pub m2: Option<f64>,
    /// Oracle / profile grid cells
    #[arg(long)]
    pub cells: Option<usize>,
    /// Oracle convergence tolerance
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated outputs: csv,json,svg
    #[arg(long)]
    pub format: Option<String>,
    /// Seed for randomized sweeps
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub density: DensityConfig,
    pub rho1: f64,
    pub rho2: f64,
    pub m1: f64,
    pub m2: f64,
    pub cells: Option<usize>,
    pub tol: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub formats: Formats,
    pub sweep_count: usize,
    pub deltas: Vec<f64>,
}

impl RunConfig {
    pub fn resolve(args: &RunArgs) -> Result<Self, CliError> {
        let file: FileConfig = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Config(format!("malformed config {}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };

        let density = match args.density.as_deref() {
            Some("phi-mu") => DensityConfig::PhiMu { mu: args.mu.unwrap_or(3.0) },
            Some("g-tilde-k") => DensityConfig::GTildeK { k: args.k.unwrap_or(2.0) },
            Some("minimal-surface") => DensityConfig::MinimalSurface,
            Some("custom") => DensityConfig::Custom {
                mu: args.mu.unwrap_or(3.0),
                mu_bar: args.mu_bar.or(args.mu).unwrap_or(3.0),
            },
            Some(other) => {
                return Err(CliError::Config(format!(
                    "unknown density family '{other}' (expected phi-mu, g-tilde-k, minimal-surface or custom)"
                )));
            }
            None => match (file.density, args.mu) {
                (Some(d), Some(mu)) => match d {
                    DensityConfig::PhiMu { .. } => DensityConfig::PhiMu { mu },
                    other => other,
                },
                (Some(d), None) => d,
                (None, mu) => DensityConfig::PhiMu { mu: mu.unwrap_or(3.0) },
            },
        };

        let formats = {
            let requested: Vec<String> = match (&args.format, file.formats) {
                (Some(s), _) => s.split(',').map(|p| p.trim().to_string()).collect(),
                (None, Some(v)) => v,
                (None, None) => vec!["csv".into(), "json".into()],
            };
            let mut f = Formats { csv: false, json: false, svg: false };
            for part in &requested {
                match part.as_str() {
                    "csv" => f.csv = true,
                    "json" => f.json = true,
                    "svg" => f.svg = true,
                    other => {
                        return Err(CliError::Config(format!(
                            "unknown output format '{other}' (expected csv, json or svg)"
                        )));
                    }
                }
            }
            f
        };

        let deltas = file.deltas.unwrap_or_else(|| vec![1e-1, 1e-2, 1e-3, 1e-4]);

        Ok(Self {
            density,
            rho1: args.rho1.or(file.rho1).unwrap_or(1.0),
            rho2: args.rho2.or(file.rho2).unwrap_or(2.0),
            m1: args.m1.or(file.m1).unwrap_or(0.0),
            m2: args.m2.or(file.m2).unwrap_or(1.0),
            cells: args.cells.or(file.cells),
            tol: args.tol.or(file.tol).unwrap_or(1e-10),
            seed: args.seed.or(file.seed).unwrap_or(radial_bv::suite::DEFAULT_SEED),
            out: args
                .out
                .clone()
                .or_else(|| file.out.map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("out")),
            formats,
            sweep_count: file.sweep_count.unwrap_or(20),
            deltas,
        })
    }

    /// Problem instance after full validation; failures are config errors.
    pub fn problem(&self) -> Result<RadialProblem, CliError> {
        let density = self
            .density
            .build()
            .map_err(|e| CliError::Config(format!("invalid density: {e}")))?;
        RadialProblem::new(density, self.rho1, self.rho2, self.m1, self.m2)
            .map_err(|e| CliError::Config(format!("invalid problem: {e}")))
    }
}
