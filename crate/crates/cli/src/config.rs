use std::path::{Path, PathBuf};

use clap::ValueEnum;
use phgen::sample::{HLaw, SamplerSpec};
use phgen::system::{Dims, DEFAULT_STRUCTURE_TOL};
use phgen::ScalarField;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

pub const SEED_ENV: &str = "PHGEN_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum HLawName {
    Wishart,
    ShiftedGram,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
    Both,
}

/// Effective settings of one invocation. Built from defaults, then the
/// `PHGEN_SEED` variable, then `--config`, then flags; echoed into reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: String,
    pub n: usize,
    pub m: usize,
    pub field: ScalarField,
    pub h_law: HLawName,
    /// Wishart degrees of freedom; `None` means `n`.
    pub wishart_p: Option<usize>,
    pub gram_eps: f64,
    pub j_scale: f64,
    pub b_scale: f64,
    pub structure_tol: f64,
    pub rank_tol: Option<f64>,
    pub pbh_tol: Option<f64>,
    pub require_pd: bool,
    pub seed: u64,
    pub trials: u64,
    pub count: u64,
    pub batch_size: u64,
    pub cross_check: bool,
    pub k: usize,
    pub eps_grid: Vec<f64>,
    pub grid_points: usize,
    pub refine_iters: usize,
    pub i_max: u64,
    pub x: Option<f64>,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub format: ReportFormat,
}

pub fn default_eps_grid() -> Vec<f64> {
    vec![0.0, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1]
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            subcommand: String::new(),
            n: 2,
            m: 1,
            field: ScalarField::Real,
            h_law: HLawName::Wishart,
            wishart_p: None,
            gram_eps: 1.0,
            j_scale: 1.0,
            b_scale: 1.0,
            structure_tol: DEFAULT_STRUCTURE_TOL,
            rank_tol: None,
            pbh_tol: None,
            require_pd: false,
            seed: 0,
            trials: 1000,
            count: 1,
            batch_size: 1000,
            cross_check: false,
            k: 1,
            eps_grid: default_eps_grid(),
            grid_points: 200,
            refine_iters: 400,
            i_max: 1_000_000,
            x: None,
            input: None,
            out: None,
            csv: None,
            format: ReportFormat::Json,
        }
    }
}

impl RunConfig {
    /// Defaults, overridden by `PHGEN_SEED` and then by the config file.
    pub fn layered(env_seed: Option<&str>, file: Option<&Path>) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(s) = env_seed {
            cfg.seed = s
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{SEED_ENV}={s:?} is not an unsigned integer")))?;
        }
        let Some(path) = file else { return Ok(cfg) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut overlay: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        // a report may be passed back in; its config is under "config"
        if let Some(inner) = overlay.get("config").filter(|v| v.is_object()) {
            overlay = inner.clone();
        }
        let Value::Object(overlay) = overlay else {
            return Err(CliError::Usage(format!("config {} must be a JSON object", path.display())));
        };
        let mut merged = serde_json::to_value(&cfg).expect("config serializes");
        if let Value::Object(base) = &mut merged {
            base.extend(overlay);
        }
        serde_json::from_value(merged)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    pub fn dims(&self) -> Result<Dims, CliError> {
        Ok(Dims::new(self.n, self.m)?)
    }

    pub fn sampler(&self) -> Result<SamplerSpec, CliError> {
        let h_law = match self.h_law {
            HLawName::Wishart => HLaw::Wishart {
                p: self.wishart_p.unwrap_or(self.n),
            },
            HLawName::ShiftedGram => HLaw::ShiftedGram { eps: self.gram_eps },
        };
        let spec = SamplerSpec {
            dims: self.dims()?,
            field: self.field,
            j_scale: self.j_scale,
            h_law,
            b_scale: self.b_scale,
            seed: self.seed,
        };
        spec.check()?;
        Ok(spec)
    }

    pub fn echo(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }
}
