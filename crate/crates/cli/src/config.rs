//! Scenario configuration files.
//!
//! A scenario is a JSON object with a `schema_version`, the system kind and
//! its parameter block, the reach budget and the output locations. Unknown
//! fields are rejected everywhere.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use stochreach::systems::attitude::{build_attitude_system, AttitudeConfig};
use stochreach::systems::cwh::{build_cwh_system, CwhConfig, DOMAIN_SIGMAS};
use stochreach::{
    IntervalVector, LinearDecomposition, LinearDynamics, MarginalSpec, Matrix, ProductDistribution,
    StochasticSystem, ValidationConfig,
};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SystemKind {
    #[serde(rename = "cwh")]
    Cwh,
    #[serde(rename = "attitude7d")]
    Attitude7d,
    #[serde(rename = "custom-linear")]
    CustomLinear,
}

impl SystemKind {
    pub fn name(self) -> &'static str {
        match self {
            SystemKind::Cwh => "cwh",
            SystemKind::Attitude7d => "attitude7d",
            SystemKind::CustomLinear => "custom-linear",
        }
    }

    fn block(self) -> &'static str {
        match self {
            SystemKind::Cwh => "cwh",
            SystemKind::Attitude7d => "attitude7d",
            SystemKind::CustomLinear => "custom_linear",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub system: SystemKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cwh: Option<CwhConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attitude7d: Option<AttitudeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom_linear: Option<CustomLinearConfig>,
    pub delta0: f64,
    pub delta_w: f64,
    pub horizon: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<MonteCarloConfig>,
    #[serde(default)]
    pub validation: ValidationSettings,
    pub outputs: OutputPaths,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloConfig {
    /// Number of sampled trajectories.
    pub trajectories: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidationSettings {
    pub samples: usize,
    pub consistency_tol: f64,
    pub monotonicity_tol: f64,
}

impl Default for ValidationSettings {
    fn default() -> Self {
        let c = ValidationConfig::default();
        Self {
            samples: 1000,
            consistency_tol: c.consistency_tol,
            monotonicity_tol: c.monotonicity_tol,
        }
    }
}

impl ValidationSettings {
    pub fn tolerances(&self) -> ValidationConfig {
        ValidationConfig {
            consistency_tol: self.consistency_tol,
            monotonicity_tol: self.monotonicity_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub tube_path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectories_path: Option<PathBuf>,
    pub summary_path: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinearDecompositionKind {
    Linear,
    /// Positive and negative parts exchanged; not a valid decomposition.
    /// Exists to exercise the validator.
    SwappedSigns,
}

/// `x⁺ = Â x + G w` with explicit marginals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomLinearConfig {
    pub a_hat: Vec<Vec<f64>>,
    pub g: Vec<Vec<f64>>,
    pub sample_time: f64,
    pub x0: Vec<MarginalSpec>,
    pub w: Vec<MarginalSpec>,
    #[serde(default = "default_decomposition")]
    pub decomposition: LinearDecompositionKind,
}

fn default_decomposition() -> LinearDecompositionKind {
    LinearDecompositionKind::Linear
}

/// Parses a scenario, reporting the JSON path of the first offending field.
pub fn parse(text: &str) -> Result<ScenarioConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            CliError::Config(e.into_inner().to_string())
        } else {
            CliError::Config(format!("{path}: {}", e.into_inner()))
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

fn unit_open(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(CliError::Config(format!(
            "{name}: must lie in (0, 1), got {v}"
        )))
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version: expected {SCHEMA_VERSION}, got {}",
                self.schema_version
            )));
        }
        let present = [
            (SystemKind::Cwh, self.cwh.is_some()),
            (SystemKind::Attitude7d, self.attitude7d.is_some()),
            (SystemKind::CustomLinear, self.custom_linear.is_some()),
        ];
        for (kind, is_present) in present {
            if kind == self.system && !is_present {
                return Err(CliError::Config(format!(
                    "{}: block required for system \"{}\"",
                    kind.block(),
                    kind.name()
                )));
            }
            if kind != self.system && is_present {
                return Err(CliError::Config(format!(
                    "{}: block does not match system \"{}\"",
                    kind.block(),
                    self.system.name()
                )));
            }
        }
        unit_open("delta0", self.delta0)?;
        unit_open("delta_w", self.delta_w)?;
        if self.horizon == 0 {
            return Err(CliError::Config("horizon: must be positive".into()));
        }
        if let Some(mc) = &self.monte_carlo {
            if mc.trajectories == 0 {
                return Err(CliError::Config(
                    "monte_carlo.trajectories: must be positive".into(),
                ));
            }
        }
        if self.validation.samples == 0 {
            return Err(CliError::Config(
                "validation.samples: must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Points every output at `dir`, keeping the configured file names.
    pub fn redirect_outputs(&mut self, dir: &Path) {
        let move_to = |p: &Path| dir.join(p.file_name().unwrap_or(p.as_os_str()));
        self.outputs.tube_path = move_to(&self.outputs.tube_path);
        self.outputs.summary_path = move_to(&self.outputs.summary_path);
        if let Some(t) = &self.outputs.trajectories_path {
            self.outputs.trajectories_path = Some(move_to(t));
        }
    }

    pub fn build(&self) -> Result<Scenario, CliError> {
        let block = |e: stochreach::Error| CliError::from_core(e, Some(self.system.block()));
        let (system, initial, disturbance) = match self.system {
            SystemKind::Cwh => {
                let c = self.cwh.as_ref().expect("checked in validate");
                (
                    build_cwh_system(c).map_err(block)?,
                    c.initial_distribution().map_err(block)?,
                    c.disturbance_distribution().map_err(block)?,
                )
            }
            SystemKind::Attitude7d => {
                let c = self.attitude7d.as_ref().expect("checked in validate");
                (
                    build_attitude_system(c).map_err(block)?,
                    c.initial_distribution().map_err(block)?,
                    c.disturbance_distribution().map_err(block)?,
                )
            }
            SystemKind::CustomLinear => {
                let c = self.custom_linear.as_ref().expect("checked in validate");
                build_custom_linear(c).map_err(block)?
            }
        };
        Ok(Scenario {
            kind: self.system,
            system,
            initial,
            disturbance,
        })
    }
}

/// A built system together with its distributions.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub kind: SystemKind,
    pub system: StochasticSystem,
    pub initial: ProductDistribution,
    pub disturbance: ProductDistribution,
}

fn support_box(marginals: &[MarginalSpec]) -> stochreach::Result<IntervalVector> {
    let (lo, hi) = marginals
        .iter()
        .map(|m| match *m {
            MarginalSpec::Gaussian { mean, std } => {
                (mean - DOMAIN_SIGMAS * std, mean + DOMAIN_SIGMAS * std)
            }
            MarginalSpec::Uniform { lo, hi } => (lo, hi),
            MarginalSpec::Point { value } => (value, value),
        })
        .unzip();
    IntervalVector::new(lo, hi)
}

fn build_custom_linear(
    c: &CustomLinearConfig,
) -> stochreach::Result<(StochasticSystem, ProductDistribution, ProductDistribution)> {
    let a = Matrix::from_rows(&c.a_hat)?;
    let g = Matrix::from_rows(&c.g)?;
    let decomposition = match c.decomposition {
        LinearDecompositionKind::Linear => LinearDecomposition::new(&a, &g),
        LinearDecompositionKind::SwappedSigns => LinearDecomposition::swapped(&a, &g),
    };
    let initial = ProductDistribution::new(c.x0.clone())?;
    let disturbance = ProductDistribution::new(c.w.clone())?;
    let system = StochasticSystem::new(
        Arc::new(LinearDynamics::new(a, g)?),
        Arc::new(decomposition),
        support_box(&c.x0)?,
        support_box(&c.w)?,
        c.sample_time,
    )?;
    Ok((system, initial, disturbance))
}
