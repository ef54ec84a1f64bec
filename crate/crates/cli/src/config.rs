//! Run configuration: a flat key/value table read from TOML (or JSON, so an
//! echoed summary config can be fed back in), overridden by flags.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use immunolearn_core::analytics::identify_parameters;
use immunolearn_core::{MatrixParams, SingleColumnParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    SingleColumn,
    Matrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Every key a config file may carry. All optional; unknown keys are an
/// error.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelKind>,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pd: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
    /// Where results go; not echoed, it does not affect them.
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    /// Worker threads; not echoed, results do not depend on it.
    #[serde(skip_serializing)]
    pub threads: Option<usize>,
    /// Time-grid resolution for `figure-data`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
}

pub const DEFAULT_M: usize = 200;
pub const DEFAULT_N: usize = 100;
pub const DEFAULT_P: f64 = 0.1;
pub const DEFAULT_REPLICATES: usize = 200;
pub const DEFAULT_GRID_POINTS: usize = 200;

macro_rules! overlay {
    ($base:ident, $top:ident, $($field:ident),*) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field.clone(); } )*
    };
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
        let is_json = path.extension().is_some_and(|e| e == "json");
        if is_json {
            // Accept either a bare config or a summary with a `config` field.
            let value: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let value = match value.get("config") {
                Some(inner) => inner.clone(),
                None => value,
            };
            serde_json::from_value(value).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        } else {
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        }
    }

    /// `self` with every field set in `top` replaced.
    pub fn overlay(mut self, top: &RunConfig) -> Self {
        overlay!(
            self,
            top,
            model,
            m,
            n,
            p,
            pd,
            pm,
            lambda_m,
            alpha,
            replicates,
            horizon,
            seed,
            format,
            out,
            threads,
            grid_points
        );
        self
    }

    pub fn model(&self) -> ModelKind {
        self.model.unwrap_or(ModelKind::Matrix)
    }

    pub fn format(&self) -> OutputFormat {
        self.format.unwrap_or(OutputFormat::Csv)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn replicates(&self) -> Result<usize, CliError> {
        match self.replicates.unwrap_or(DEFAULT_REPLICATES) {
            0 => Err(CliError::Config("replicates must be at least 1".into())),
            r => Ok(r),
        }
    }

    pub fn grid_points(&self) -> Result<usize, CliError> {
        match self.grid_points.unwrap_or(DEFAULT_GRID_POINTS) {
            n if n < 2 => Err(CliError::Config("grid_points must be at least 2".into())),
            n => Ok(n),
        }
    }

    pub fn horizon(&self) -> Result<Option<f64>, CliError> {
        match self.horizon {
            Some(h) if !(h > 0.0 && h.is_finite()) => {
                Err(CliError::Config(format!("horizon must be positive and finite, got {h}")))
            }
            h => Ok(h),
        }
    }

    fn uses_discrete(&self) -> Result<bool, CliError> {
        let discrete = self.pd.is_some() || self.pm.is_some();
        if discrete && (self.p.is_some() || self.lambda_m.is_some() || self.alpha.is_some()) {
            return Err(CliError::Config("give either pd/pm or the chain rates p/lambda_m/alpha, not both".into()));
        }
        Ok(discrete)
    }

    /// Single-column rates. With `pd`/`pm` the discrete-model
    /// identification is used (`p = pd/N`, `α = 1 + pm·M`).
    pub fn single_column(&self) -> Result<SingleColumnParams, CliError> {
        let m = self.m.unwrap_or(DEFAULT_M);
        if self.uses_discrete()? {
            let (single, _) = identify_parameters(
                self.pd.unwrap_or(DEFAULT_P),
                self.n.unwrap_or(DEFAULT_N),
                self.pm.unwrap_or(0.0),
                m,
            )?;
            return Ok(single);
        }
        Ok(SingleColumnParams::new(m, self.alpha.unwrap_or(1.0), self.p.unwrap_or(DEFAULT_P))?)
    }

    /// Matrix rates. With `pd`/`pm`: `p = pd`, `λ_m = pm·M`.
    pub fn matrix(&self) -> Result<MatrixParams, CliError> {
        let m = self.m.unwrap_or(DEFAULT_M);
        let n = self.n.unwrap_or(DEFAULT_N);
        if self.uses_discrete()? {
            let (_, matrix) = identify_parameters(self.pd.unwrap_or(DEFAULT_P), n, self.pm.unwrap_or(0.0), m)?;
            return Ok(matrix);
        }
        if self.alpha.is_some() {
            return Err(CliError::Config("alpha applies to the single-column model only".into()));
        }
        Ok(MatrixParams::new(m, n, self.p.unwrap_or(DEFAULT_P), self.lambda_m.unwrap_or(0.0))?)
    }

    /// The configuration with defaults made explicit, as echoed in
    /// summaries.
    pub fn effective(&self) -> RunConfig {
        let mut e = self.clone();
        e.model = Some(self.model());
        e.m = Some(self.m.unwrap_or(DEFAULT_M));
        e.n = Some(self.n.unwrap_or(DEFAULT_N));
        e.seed = Some(self.seed());
        e.format = Some(self.format());
        e.replicates = Some(self.replicates.unwrap_or(DEFAULT_REPLICATES));
        let discrete = self.pd.is_some() || self.pm.is_some();
        if discrete {
            // pm stays as given: figure-data sweeps it when absent
            e.pd = Some(self.pd.unwrap_or(DEFAULT_P));
        } else {
            e.p = Some(self.p.unwrap_or(DEFAULT_P));
            match self.model() {
                ModelKind::Matrix => e.lambda_m = Some(self.lambda_m.unwrap_or(0.0)),
                ModelKind::SingleColumn => e.alpha = Some(self.alpha.unwrap_or(1.0)),
            }
        }
        e
    }
}
