//! Run configuration: JSON file, command-line flags and per-subcommand defaults.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Everything a run depends on. Absent fields take the subcommand default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub big_n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub engine: Option<Engine>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jmax: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nmax: Option<usize>,
    /// Output directory. Not embedded in outputs, so runs into different
    /// directories stay byte-identical.
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Quadrature,
    Mc,
}

/// Numeric flags shared by every subcommand; each mirrors a RunConfig field.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Lattice dimension
    #[arg(long)]
    pub d: Option<usize>,
    /// Block side length
    #[arg(long = "L")]
    pub l: Option<usize>,
    /// Number of scales (volume L^{dN})
    #[arg(long = "N")]
    pub big_n: Option<usize>,
    /// Number of field components
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub m2: Option<f64>,
    /// Bare quartic coupling
    #[arg(long, visible_alias = "g", allow_negative_numbers = true)]
    pub g0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub nu0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub mu0: Option<f64>,
    #[arg(long, value_enum)]
    pub engine: Option<Engine>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub jmax: Option<usize>,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Gauss–Hermite order of the oracle
    #[arg(long)]
    pub order: Option<usize>,
    /// Half-width constant of the bisection window
    #[arg(long)]
    pub c0: Option<f64>,
    /// Coefficient B of the susceptibility ODE
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub eps_min: Option<f64>,
    #[arg(long)]
    pub eps_max: Option<f64>,
    #[arg(long)]
    pub eps_points: Option<usize>,
    /// Comma-separated β values
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub beta: Option<Vec<f64>>,
    /// Comma-separated h values
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub h: Option<Vec<f64>>,
    /// Longest walk length to enumerate
    #[arg(long)]
    pub nmax: Option<usize>,
}

macro_rules! overlay {
    ($dst:expr, $src:expr, $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("config error at line {} column {}: {e}", e.line(), e.column()))
    }

    pub fn apply_flags(&mut self, f: &Flags) {
        overlay!(self, f, d, l, big_n, n, m2, g0, nu0, mu0, engine, tol, jmax, nodes, samples, order, c0, b, eps_min, eps_max, eps_points, beta, h, nmax);
    }

    /// Fill unset fields from `defaults`.
    pub fn with_defaults(self, defaults: &RunConfig) -> Self {
        let mut out = defaults.clone();
        overlay!(out, self, d, l, big_n, n, m2, g0, nu0, mu0, engine, seed, tol, jmax, nodes, samples, order, c0, b, eps_min, eps_max, eps_points, beta, h, nmax, out);
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serialises")
    }

    /// SHA-256 of the compact JSON of the resolved config.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serialises");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Read a required field that the subcommand default always provides.
macro_rules! req {
    ($cfg:expr, $f:ident) => {
        $cfg.$f.clone().ok_or_else(|| crate::CliError::Validation(format!("missing field {}", stringify!($f))))?
    };
}
pub(crate) use req;
