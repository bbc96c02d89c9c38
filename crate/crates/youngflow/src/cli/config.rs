//! Experiment configuration files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coefficients::{builtin_field, select_exponents, CoefficientField, ExponentSet, FieldSpec};
use crate::drivers::{analytic_driver_dim, fbm_sample_dim, uniform_grid, DriverKind, FbmSpec};
use crate::paths::SampledPath;
use crate::solver::SolveOptions;
use crate::{Error, Result};

/// Driver section: `kind` is `fbm` or an analytic kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriverConfig {
    pub kind: String,
    #[serde(default)]
    pub hurst: Option<f64>,
    /// Positional parameters of analytic kinds.
    #[serde(default)]
    pub params: Vec<f64>,
    pub horizon: f64,
    pub samples: usize,
}

/// `"auto"` or explicit exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExponentConfig {
    Auto(String),
    Explicit { p: f64, alpha: f64, beta: f64, delta: f64 },
}

impl Default for ExponentConfig {
    fn default() -> Self {
        ExponentConfig::Auto("auto".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: String,
    pub field: FieldSpec,
    pub driver: DriverConfig,
    #[serde(default)]
    pub exponents: ExponentConfig,
    #[serde(default)]
    pub solve: SolveOptions,
    #[serde(default)]
    pub t0: f64,
    #[serde(default = "default_x0")]
    pub x0: Vec<f64>,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Probes of the flow check, spread around `x0`.
    #[serde(default = "default_probes")]
    pub flow_probes: usize,
}

fn default_x0() -> Vec<f64> {
    vec![1.0]
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_probes() -> usize {
    2
}

impl ExperimentConfig {
    /// Parses JSON; errors carry the line and column of the problem.
    pub fn from_json(text: &str, origin: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| {
            Error::Parameter(format!("{origin}: line {} column {}: {e}", e.line(), e.column()))
        })?;
        cfg.validate().map_err(|e| Error::Parameter(format!("{origin}: {e}")))?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parameter(format!("{}: {e}", path.display())))?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn horizon(&self) -> f64 {
        self.driver.horizon
    }

    /// Exponents, explicit or chosen from the driver.
    pub fn exponent_set(&self) -> Result<ExponentSet> {
        match &self.exponents {
            ExponentConfig::Auto(s) if s == "auto" => {
                let p = match (self.driver.kind.as_str(), self.driver.hurst) {
                    // Halfway between 1/H and 2, a quarter of the way up.
                    ("fbm", Some(h)) => 1.0 / h + (2.0 - 1.0 / h) / 4.0,
                    _ => 1.5,
                };
                select_exponents(p, 0.75, 1.0, 1.0)
            }
            ExponentConfig::Auto(s) => Err(Error::Parameter(format!("exponents must be \"auto\" or an object, got \"{s}\""))),
            ExponentConfig::Explicit { p, alpha, beta, delta } => select_exponents(*p, *alpha, *beta, *delta),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let exps = self.exponent_set()?;
        self.build_field(&exps)?;
        DriverKindOrFbm::parse(&self.driver)?;
        if self.driver.samples < 2 {
            return Err(Error::Parameter("driver needs at least 2 samples".into()));
        }
        if !(self.driver.horizon > self.t0) {
            return Err(Error::Parameter(format!("driver horizon {} must exceed t0 = {}", self.driver.horizon, self.t0)));
        }
        if self.x0.len() != self.field.dim {
            return Err(Error::Parameter(format!(
                "x0 has {} components, field dimension is {}",
                self.x0.len(),
                self.field.dim
            )));
        }
        if self.seeds.is_empty() {
            return Err(Error::Parameter("seeds list is empty".into()));
        }
        Ok(())
    }

    pub fn build_field(&self, exps: &ExponentSet) -> Result<CoefficientField> {
        builtin_field(&self.field, exps.alpha, exps.beta, exps.delta, self.horizon())
    }

    pub fn build_driver(&self, seed: u64) -> Result<SampledPath> {
        let dim = self.field.noise_dim;
        match DriverKindOrFbm::parse(&self.driver)? {
            DriverKindOrFbm::Fbm(h) => fbm_sample_dim(
                &FbmSpec {
                    hurst: h,
                    horizon: self.driver.horizon,
                    samples: self.driver.samples,
                    seed,
                },
                dim,
            ),
            DriverKindOrFbm::Analytic(kind) => {
                let kind = match kind {
                    DriverKind::BrownianLike { scale, .. } => DriverKind::BrownianLike { seed, scale },
                    other => other,
                };
                let grid = uniform_grid(0.0, self.driver.horizon, self.driver.samples);
                analytic_driver_dim(kind, &grid, dim)
            }
        }
    }

    /// Solve options with the exponent `p` of this configuration.
    pub fn solve_options(&self, exps: &ExponentSet) -> SolveOptions {
        SolveOptions {
            p: exps.p,
            ..self.solve.clone()
        }
    }
}

enum DriverKindOrFbm {
    Fbm(f64),
    Analytic(DriverKind),
}

impl DriverKindOrFbm {
    fn parse(cfg: &DriverConfig) -> Result<DriverKindOrFbm> {
        if cfg.kind == "fbm" {
            let h = cfg
                .hurst
                .ok_or_else(|| Error::Parameter("fbm driver needs `hurst`".into()))?;
            Ok(DriverKindOrFbm::Fbm(h))
        } else {
            Ok(DriverKindOrFbm::Analytic(DriverKind::from_name(&cfg.kind, &cfg.params)?))
        }
    }
}
