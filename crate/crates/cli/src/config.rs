use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Experiment parameters. Every field is optional; unset fields fall back to the preset.
/// The same struct is read from a JSON config file, where unknown keys are rejected.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    /// JSON config file; command-line flags override its entries
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Experiment name, checked against the subcommand when given in a config file
    #[arg(skip)]
    pub experiment: Option<String>,
    /// `smoke` for a fast run; galois-check and dirac-lift also accept instance names
    #[arg(long)]
    pub preset: Option<String>,
    /// Circle grid size N
    #[arg(long)]
    pub grid: Option<usize>,
    /// Line window W (translates |g| ≤ W)
    #[arg(long)]
    pub window: Option<usize>,
    /// Base matrix dimension
    #[arg(long)]
    pub q: Option<usize>,
    /// Numerator of θ = p/q for clock and shift matrices
    #[arg(long)]
    pub p: Option<i64>,
    /// First cover degree (torus cover)
    #[arg(long)]
    pub m: Option<usize>,
    /// Cover degree, or second cover degree for the torus cover
    #[arg(long)]
    pub n: Option<usize>,
    /// Shift of the cover angle θ′ = (θ + k)/(mn)
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau_re: Option<f64>,
    #[arg(long)]
    pub tau_im: Option<f64>,
    /// Lattice or mode cutoff R
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// Length of an analytic singular-value series
    #[arg(long)]
    pub terms: Option<usize>,
    /// Finite group, e.g. Z3 or Z2xZ2
    #[arg(long)]
    pub group: Option<String>,
    /// Matrix dimension of random instances
    #[arg(long)]
    pub dim: Option<usize>,
    /// Number of parts in a random partition
    #[arg(long)]
    pub parts: Option<usize>,
    /// Number of random instances
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Half-width s of the SU(2) sample grid
    #[arg(long)]
    pub spread: Option<f64>,
    /// Spectral distance below which neighbouring SU(2) sheets are joined
    #[arg(long)]
    pub join: Option<f64>,
    /// Mapping-cone grid points in t and φ
    #[arg(long)]
    pub t_points: Option<usize>,
    #[arg(long)]
    pub phi_points: Option<usize>,
    /// galois-check: read the action from this JSON document instead of a preset
    #[arg(long)]
    pub action: Option<PathBuf>,
    /// galois-check: write the action of a single-instance preset to this JSON document
    #[arg(long)]
    pub save_action: Option<PathBuf>,
    /// JSON report path (stdout when absent)
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Directory for CSV plot data
    #[arg(long)]
    pub plot_dir: Option<PathBuf>,
}

macro_rules! overlay {
    ($flags:expr, $file:expr, $($field:ident),*) => {
        Params { config: $flags.config.clone(), $($field: $flags.$field.clone().or($file.$field.clone())),* }
    };
}

impl Params {
    /// Flags win over the config file.
    pub fn merged(flags: &Params, file: &Params) -> Params {
        overlay!(
            flags,
            file,
            experiment,
            preset,
            grid,
            window,
            q,
            p,
            m,
            n,
            k,
            theta,
            tau_re,
            tau_im,
            cutoff,
            terms,
            group,
            dim,
            parts,
            count,
            seed,
            spread,
            join,
            t_points,
            phi_points,
            action,
            save_action,
            output,
            plot_dir
        )
    }

    pub fn load(path: &Path) -> Result<Params, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
    }

    /// Flags merged with the config file they name, if any.
    pub fn resolve(flags: &Params, experiment: &str) -> Result<Params, CliError> {
        let merged = match &flags.config {
            Some(path) => Params::merged(flags, &Params::load(path)?),
            None => flags.clone(),
        };
        if let Some(name) = &merged.experiment {
            if name != experiment {
                return Err(CliError::Config(format!("config is for '{name}', not '{experiment}'")));
            }
        }
        Ok(merged)
    }

    pub fn is_smoke(&self) -> bool {
        self.preset.as_deref() == Some("smoke")
    }

    /// Explicit value, else the smoke or full default.
    pub fn pick<T: Clone>(&self, value: &Option<T>, full: T, smoke: T) -> T {
        value.clone().unwrap_or(if self.is_smoke() { smoke } else { full })
    }
}

pub fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), CliError> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Config(msg()))
    }
}
