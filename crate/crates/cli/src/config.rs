//! Run configuration: command-line flags layered over an optional JSON file.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

use spade_core::{ConnectPolicy, DistanceMetric, KnnMode, MatrixFormat};

use crate::error::CliError;

/// Every field is optional so that flags can override a config file
/// field by field. JSON keys are the snake_case field names.
#[derive(Debug, Clone, Default, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// JSON file with any of these settings; flags take precedence
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Subcommand name, accepted in config files for documentation only
    #[arg(skip)]
    pub command: Option<String>,

    /// Input samples, one row per sample (CSV or SPMX)
    #[arg(long, global = true)]
    pub x: Option<PathBuf>,
    /// Output samples, row-aligned with --x
    #[arg(long, global = true)]
    pub y: Option<PathBuf>,
    /// Prebuilt input graph (SPGR); excludes --x/--y
    #[arg(long, global = true)]
    pub gx: Option<PathBuf>,
    /// Prebuilt output graph (SPGR)
    #[arg(long, global = true)]
    pub gy: Option<PathBuf>,
    /// Matrix format: auto, csv or binary
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Skip the first line of CSV matrices
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true", require_equals = true)]
    pub header: Option<bool>,

    /// Neighbors per sample [default: 10]
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// kNN search: exact or approximate [default: exact]
    #[arg(long, global = true)]
    pub mode: Option<String>,
    /// Beam width for approximate search [default: 64]
    #[arg(long, global = true)]
    pub ef: Option<usize>,
    /// Disconnected graphs: error, grow-k or giant-component [default: error]
    #[arg(long = "connect", global = true)]
    pub connect_policy: Option<String>,

    /// Number of generalized eigenpairs [default: 2, or 1 for `dmd --top`]
    #[arg(long, global = true)]
    pub r: Option<usize>,
    /// Eigensolver tolerance [default: 1e-6]
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Eigensolver sweep cap per pair [default: 1000]
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    /// Use a random-projection resistance sketch with this distortion
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Also report the Riemannian distance over the m largest eigenvalues
    #[arg(long, global = true)]
    pub m: Option<usize>,
    /// Nodes listed by `rank` [default: 10]
    #[arg(long, global = true)]
    pub top_k: Option<usize>,
    /// `dmd`: compare the N highest-scoring edges with N random edges
    #[arg(long, global = true)]
    pub top: Option<usize>,
    /// `dmd`: CSV of node pairs `p,q`
    #[arg(long, global = true)]
    pub pairs: Option<PathBuf>,
    /// Distance metric for `dmd`: resistance or geodesic [default: resistance]
    #[arg(long, global = true)]
    pub metric: Option<String>,
    /// Seed for every random choice [default: 0]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (stdout when absent)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// `graph`: output file for the output-side graph
    #[arg(long, global = true)]
    pub out_y: Option<PathBuf>,
    /// Cross-check results against the dense reference implementations
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true", require_equals = true)]
    pub oracle: Option<bool>,
    /// `oracle-check`: random instances when no inputs are given [default: 20]
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// `oracle-check`: nodes per random instance [default: 30]
    #[arg(long, global = true)]
    pub n: Option<usize>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($field:ident),+ $(,)?) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field.clone(); } )+
    };
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::ConfigFile {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        serde_json::from_str(&text).map_err(|e| CliError::ConfigFile {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    /// `self` with every field set in `flags` replaced.
    pub fn overlay(mut self, flags: &RunConfig) -> Self {
        overlay!(
            self, flags, x, y, gx, gy, format, header, k, mode, ef, connect_policy, r, tol, max_iter, epsilon, m,
            top_k, top, pairs, metric, seed, out, out_y, oracle, trials, n,
        );
        self
    }

    pub fn resolve(self, command: &str) -> Result<Settings, CliError> {
        if let Some(c) = &self.command {
            if c != command {
                return Err(CliError::Config(format!(
                    "config file is for command {c:?}, not {command:?}"
                )));
            }
        }
        let trimmed = |value: &Option<String>| value.as_deref().map(str::trim).map(str::to_string);
        let format = match trimmed(&self.format) {
            Some(s) => s.parse::<MatrixFormat>().map_err(|e| CliError::Config(e.to_string()))?,
            None => MatrixFormat::Auto,
        };
        let mode = match trimmed(&self.mode) {
            Some(s) => s.parse::<KnnMode>().map_err(CliError::Config)?,
            None => KnnMode::Exact,
        };
        let connect = match trimmed(&self.connect_policy) {
            Some(s) => s.parse::<ConnectPolicy>().map_err(CliError::Config)?,
            None => ConnectPolicy::Error,
        };
        let metric = match trimmed(&self.metric) {
            Some(s) => s.parse::<DistanceMetric>().map_err(CliError::Config)?,
            None => DistanceMetric::Resistance,
        };
        let inputs = match (&self.x, &self.y, &self.gx, &self.gy) {
            (None, None, None, None) => Inputs::None,
            (x, y, None, None) => Inputs::Matrices {
                x: x.clone(),
                y: y.clone(),
            },
            (None, None, Some(gx), Some(gy)) => Inputs::Graphs {
                gx: gx.clone(),
                gy: gy.clone(),
            },
            (None, None, _, _) => {
                return Err(CliError::Config("--gx and --gy must be given together".into()))
            }
            _ => {
                return Err(CliError::Config(
                    "give either matrices (--x/--y) or graphs (--gx/--gy), not both".into(),
                ))
            }
        };
        Ok(Settings {
            inputs,
            format,
            header: self.header.unwrap_or(false),
            k: self.k,
            mode,
            ef: self.ef.unwrap_or(64),
            connect,
            r: self.r,
            tol: self.tol.unwrap_or(1e-6),
            max_iter: self.max_iter.unwrap_or(1000),
            epsilon: self.epsilon,
            m: self.m,
            top_k: self.top_k.unwrap_or(10),
            top: self.top,
            pairs: self.pairs,
            metric,
            seed: self.seed.unwrap_or(0),
            out: self.out,
            out_y: self.out_y,
            oracle: self.oracle.unwrap_or(false),
            trials: self.trials.unwrap_or(20),
            n: self.n.unwrap_or(30),
        })
    }
}

#[derive(Debug, Clone)]
pub enum Inputs {
    None,
    Matrices { x: Option<PathBuf>, y: Option<PathBuf> },
    Graphs { gx: PathBuf, gy: PathBuf },
}

/// Fully resolved settings with defaults applied.
#[derive(Debug, Clone)]
pub struct Settings {
    pub inputs: Inputs,
    pub format: MatrixFormat,
    pub header: bool,
    /// `None` keeps the per-command default.
    pub k: Option<usize>,
    pub mode: KnnMode,
    pub ef: usize,
    pub connect: ConnectPolicy,
    pub r: Option<usize>,
    pub tol: f64,
    pub max_iter: usize,
    pub epsilon: Option<f64>,
    pub m: Option<usize>,
    pub top_k: usize,
    pub top: Option<usize>,
    pub pairs: Option<PathBuf>,
    pub metric: DistanceMetric,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub out_y: Option<PathBuf>,
    pub oracle: bool,
    pub trials: usize,
    pub n: usize,
}
