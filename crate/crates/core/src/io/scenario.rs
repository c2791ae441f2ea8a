use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::simulator::{systems, ForcingSpec, GridModel, GridModelParams, SimulationOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    TwoMachine,
    TenMachineTwoArea,
}

/// Model section of a scenario: a built-in system or explicit parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
#[allow(clippy::large_enum_variant)]
pub enum ModelSpec {
    Preset {
        name: Preset,
        sigma_load: f64,
    },
    Explicit {
        labels: Vec<String>,
        inertia: Vec<f64>,
        damping: Vec<f64>,
        emf: Vec<f64>,
        /// Row-major `Y_ij` magnitudes.
        admittance_magnitude: Vec<Vec<f64>>,
        /// Row-major `φ_ij` (rad).
        admittance_angle: Vec<Vec<f64>>,
        sigma_load: Vec<f64>,
        /// Set points; derived from `balanced_at` when absent.
        mechanical_power: Option<Vec<f64>>,
        /// Angles at which `P_m` is set equal to `P_e`.
        balanced_at: Option<Vec<f64>>,
    },
}

fn square(rows: &[Vec<f64>], r: usize, what: &str) -> Result<DMatrix<f64>> {
    if rows.len() != r || rows.iter().any(|row| row.len() != r) {
        return Err(Error::ShapeMismatch(format!("{what} must be {r}x{r}")));
    }
    Ok(DMatrix::from_fn(r, r, |i, j| rows[i][j]))
}

impl ModelSpec {
    pub fn build(&self) -> Result<GridModel> {
        match self {
            ModelSpec::Preset { name, sigma_load } => {
                if !(*sigma_load >= 0.0) {
                    return Err(Error::InvalidModel(format!("sigma_load {sigma_load} is negative")));
                }
                Ok(match name {
                    Preset::TwoMachine => systems::two_machine(*sigma_load),
                    Preset::TenMachineTwoArea => systems::ten_machine_two_area(*sigma_load),
                })
            }
            ModelSpec::Explicit {
                labels,
                inertia,
                damping,
                emf,
                admittance_magnitude,
                admittance_angle,
                sigma_load,
                mechanical_power,
                balanced_at,
            } => {
                let r = labels.len();
                let model = GridModel::new(GridModelParams {
                    labels: labels.clone(),
                    inertia: inertia.clone(),
                    damping: damping.clone(),
                    emf: emf.clone(),
                    mechanical_power: mechanical_power.clone().unwrap_or_else(|| vec![0.0; r]),
                    admittance_magnitude: square(admittance_magnitude, r, "admittance_magnitude")?,
                    admittance_angle: square(admittance_angle, r, "admittance_angle")?,
                    sigma_load: sigma_load.clone(),
                })?;
                match (mechanical_power, balanced_at) {
                    (_, Some(angles)) => model.balanced_at(angles),
                    (Some(_), None) => Ok(model),
                    (None, None) => Err(Error::InvalidModel(
                        "explicit model needs mechanical_power or balanced_at".into(),
                    )),
                }
            }
        }
    }
}

fn default_duration() -> f64 {
    SimulationOptions::default().duration_s
}
fn default_rate() -> f64 {
    SimulationOptions::default().output_rate_hz
}
fn default_warmup() -> f64 {
    SimulationOptions::default().warmup_s
}

/// A simulation run: model, forcings and integration settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub model: ModelSpec,
    #[serde(default)]
    pub forcing: Vec<ForcingSpec>,
    #[serde(default = "default_duration")]
    pub duration_s: f64,
    #[serde(default = "default_rate")]
    pub output_rate_hz: f64,
    #[serde(default = "default_warmup")]
    pub warmup_s: f64,
    #[serde(default)]
    pub internal_dt_s: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl Scenario {
    pub fn build_model(&self) -> Result<GridModel> {
        self.model.build()
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn options(&self) -> SimulationOptions {
        SimulationOptions {
            duration_s: self.duration_s,
            output_rate_hz: self.output_rate_hz,
            internal_dt_s: self.internal_dt_s,
            warmup_s: self.warmup_s,
            seed: self.seed,
            ..SimulationOptions::default()
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    Scenario::from_toml(&read(path.as_ref())?)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<PipelineConfig> {
    PipelineConfig::from_toml(&read(path.as_ref())?)
}
