//! Scenario files: one JSON document wiring together a mesh, load cases,
//! sensors, the target-field predicate (or an external measurements file)
//! and the filter/optimizer/interpolation settings for an experiment.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::LoadCase;
use crate::field::TemperatureField;
use crate::interp::{InterpMethod, Sample, SampleSet, Weighting};
use crate::interp::kriging::ModelKind;
use crate::mesh::{parse_mesh, Mesh};
use crate::optimize::{FilterSettings, OptimizerConfig, StepRule};
use crate::regularize::Bounds;
use crate::sensors::{MeasurementSet, SensorSet};

/// Axis-aligned box predicate; a point matches when it lies inside, with a
/// small absolute slack so nodes sitting exactly on a face are included.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoxRule {
    pub min: [f64; 3],
    pub max: [f64; 3],
    pub value: f64,
}

const BOX_SLACK: f64 = 1e-9;

/// Piecewise-constant target field: the first matching box rule wins,
/// otherwise the default applies.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TargetSpec {
    pub rules: Vec<BoxRule>,
    pub default: f64,
}

impl TargetSpec {
    pub fn value_at(&self, p: [f64; 3]) -> f64 {
        for rule in &self.rules {
            if (0..3).all(|c| p[c] >= rule.min[c] - BOX_SLACK && p[c] <= rule.max[c] + BOX_SLACK)
            {
                return rule.value;
            }
        }
        self.default
    }

    pub fn field(&self, mesh: &Mesh) -> TemperatureField {
        TemperatureField {
            values: (0..mesh.node_count())
                .map(|i| self.value_at(mesh.position(i)))
                .collect(),
        }
    }

    /// Temperature samples read at the sensor locations (the interpolation
    /// baselines use temperature sensors in the same places).
    pub fn samples_at_sensors(&self, sensors: &SensorSet) -> Result<SampleSet> {
        SampleSet::new(
            sensors
                .sensors
                .iter()
                .map(|s| Sample {
                    position: s.position,
                    value: self.value_at(s.position),
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FilterFile {
    enabled: bool,
    radius: f64,
    lower: f64,
    upper: f64,
    #[serde(default = "default_beta")]
    beta: f64,
}

fn default_beta() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct OptimizerFile {
    max_step: f64,
    max_iterations: usize,
    #[serde(default = "default_convergence")]
    convergence_factor: f64,
    #[serde(default = "default_step_rule")]
    step_rule: String,
    #[serde(default)]
    constant_step: Option<f64>,
    #[serde(default)]
    initial_step: Option<f64>,
}

fn default_convergence() -> f64 {
    1e-5
}

fn default_step_rule() -> String {
    "barzilai_borwein".to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct InterpFile {
    #[serde(default = "default_k")]
    knn_k: usize,
    #[serde(default = "default_weighting")]
    knn_weighting: String,
    #[serde(default = "default_variogram")]
    variogram: String,
}

impl Default for InterpFile {
    fn default() -> Self {
        Self {
            knn_k: default_k(),
            knn_weighting: default_weighting(),
            variogram: default_variogram(),
        }
    }
}

fn default_k() -> usize {
    3
}

fn default_weighting() -> String {
    "inverse_distance".to_string()
}

fn default_variogram() -> String {
    "gaussian".to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ScenarioFile {
    mesh: String,
    load_cases: Vec<String>,
    sensors: String,
    #[serde(default)]
    target: Option<TargetSpec>,
    #[serde(default)]
    measurements: Option<String>,
    filter: FilterFile,
    optimizer: OptimizerFile,
    #[serde(default)]
    interp: InterpFile,
}

/// A fully loaded and validated scenario.
pub struct Scenario {
    pub mesh: Mesh,
    pub load_cases: Vec<LoadCase>,
    pub sensors: SensorSet,
    pub target: Option<TargetSpec>,
    pub measurements_path: Option<PathBuf>,
    pub filter: FilterSettings,
    pub optimizer: OptimizerConfig,
    pub knn_k: usize,
    pub knn_weighting: Weighting,
    pub variogram: ModelKind,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
        let file: ScenarioFile = serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("scenario {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let resolve = |rel: &str| base.join(rel);

        if file.target.is_some() == file.measurements.is_some() {
            return Err(Error::Validation(
                "scenario must define exactly one of `target` and `measurements`".into(),
            ));
        }

        let mesh = parse_mesh(&std::fs::read_to_string(resolve(&file.mesh))?)?;
        let load_cases = file
            .load_cases
            .iter()
            .map(|p| {
                let case = LoadCase::parse(&std::fs::read_to_string(resolve(p))?)?;
                case.validate(&mesh)?;
                Ok(case)
            })
            .collect::<Result<Vec<_>>>()?;
        if load_cases.is_empty() {
            return Err(Error::Validation(
                "scenario needs at least one load case".into(),
            ));
        }
        let sensors = SensorSet::parse(&std::fs::read_to_string(resolve(&file.sensors))?)?;
        if sensors.is_empty() {
            return Err(Error::Validation("scenario needs at least one sensor".into()));
        }

        let filter = FilterSettings {
            enabled: file.filter.enabled,
            radius: file.filter.radius,
            bounds: Bounds::new(file.filter.lower, file.filter.upper, file.filter.beta)?,
        };
        let step_rule = match file.optimizer.step_rule.as_str() {
            "barzilai_borwein" => StepRule::BarzilaiBorwein,
            "constant" => StepRule::Constant,
            other => {
                return Err(Error::Parse(format!(
                    "unknown step rule {other:?} (expected barzilai_borwein or constant)"
                )))
            }
        };
        let optimizer = OptimizerConfig {
            max_step: file.optimizer.max_step,
            max_iterations: file.optimizer.max_iterations,
            convergence_factor: file.optimizer.convergence_factor,
            step_rule,
            constant_step: file.optimizer.constant_step,
            initial_step: file.optimizer.initial_step,
        };
        optimizer.validate()?;
        let knn_weighting = match file.interp.knn_weighting.as_str() {
            "inverse_distance" => Weighting::InverseDistance,
            "uniform" => Weighting::Uniform,
            other => {
                return Err(Error::Parse(format!(
                    "unknown knn weighting {other:?}"
                )))
            }
        };
        let variogram = match file.interp.variogram.as_str() {
            "gaussian" => ModelKind::Gaussian,
            "linear" => ModelKind::Linear,
            "power" => ModelKind::Power,
            other => {
                return Err(Error::Parse(format!(
                    "unknown variogram model {other:?}"
                )))
            }
        };

        Ok(Self {
            mesh,
            load_cases,
            sensors,
            target: file.target,
            measurements_path: file.measurements.map(|p| resolve(&p)),
            filter,
            optimizer,
            knn_k: file.interp.knn_k,
            knn_weighting,
            variogram,
        })
    }

    /// Measurements for the inverse problem: read from the external file,
    /// or synthesized (noise-free) from the target spec.
    pub fn measurements(&self, threads: usize) -> Result<MeasurementSet> {
        match (&self.measurements_path, &self.target) {
            (Some(path), _) => MeasurementSet::from_csv(&std::fs::read_to_string(path)?),
            (None, Some(target)) => crate::sensors::synthesize_measurements(
                &self.mesh,
                &self.load_cases,
                &target.field(&self.mesh),
                &self.sensors,
                None,
                0,
                threads,
            ),
            (None, None) => unreachable!("validated at load"),
        }
    }

    pub fn interp_method(&self, name: &str) -> Result<InterpMethod> {
        match name {
            "knn" => Ok(InterpMethod::Knn {
                k: self.knn_k,
                weighting: self.knn_weighting,
            }),
            "ok" => Ok(InterpMethod::OrdinaryKriging {
                model: self.variogram,
            }),
            "uk" => Ok(InterpMethod::UniversalKriging {
                model: self.variogram,
            }),
            other => Err(Error::Validation(format!(
                "unknown interpolation method {other:?} (expected knn, ok or uk)"
            ))),
        }
    }
}
