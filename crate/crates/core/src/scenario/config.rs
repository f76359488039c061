//! JSON scenario configuration.
//!
//! A document may be partial: anything it leaves out is taken from the
//! named `preset` (if any) and then from the built-in defaults. Units live in
//! the key names: frequencies are `MHz / 2π`, distances μm, times μs.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::presets::{preset, PresetId};
use crate::dynamics::{IntegratorConfig, StepPolicy};
use crate::measures::{DEFAULT_EPSILON, DEFAULT_PROMINENCE};
use crate::model::{CouplingSource, Geometry, InteractionCoefficients, LaserParams, PhysicalScenario};
use crate::quantum::Tolerances;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

impl ConfigError {
    pub fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Invalid { path: path.into(), message: message.into() }
    }

    /// Dotted key path of the offending field.
    pub fn path(&self) -> &str {
        match self {
            ConfigError::Invalid { path, .. } => path,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryDoc {
    #[serde(rename = "R_um", skip_serializing_if = "Option::is_none")]
    pub r_um: Option<f64>,
    #[serde(rename = "RD1_um", skip_serializing_if = "Option::is_none")]
    pub rd1_um: Option<f64>,
    #[serde(rename = "RD2_um", skip_serializing_if = "Option::is_none")]
    pub rd2_um: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsDoc {
    #[serde(rename = "C3_MHz_um3", skip_serializing_if = "Option::is_none")]
    pub c3: Option<f64>,
    #[serde(rename = "C4rp_MHz_um4", skip_serializing_if = "Option::is_none")]
    pub c4_rp: Option<f64>,
    #[serde(rename = "C6rs_MHz_um6", skip_serializing_if = "Option::is_none")]
    pub c6_rs: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingsDoc {
    #[serde(rename = "J_MHz_over_2pi", skip_serializing_if = "Option::is_none")]
    pub j: Option<f64>,
    #[serde(rename = "U1_MHz_over_2pi", skip_serializing_if = "Option::is_none")]
    pub u1: Option<f64>,
    #[serde(rename = "U2_MHz_over_2pi", skip_serializing_if = "Option::is_none")]
    pub u2: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LasersDoc {
    #[serde(rename = "omega_p_MHz_over_2pi", skip_serializing_if = "Option::is_none")]
    pub omega_p: Option<f64>,
    #[serde(rename = "omega_c_MHz_over_2pi", skip_serializing_if = "Option::is_none")]
    pub omega_c: Option<f64>,
    #[serde(rename = "delta_p_MHz_over_2pi", skip_serializing_if = "Option::is_none")]
    pub delta_p: Option<f64>,
    #[serde(rename = "delta_c_MHz_over_2pi", skip_serializing_if = "Option::is_none")]
    pub delta_c: Option<f64>,
    #[serde(rename = "gamma_p_MHz_over_2pi", skip_serializing_if = "Option::is_none")]
    pub gamma_p: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolerancesDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hermiticity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub positivity: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt_us: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max_us: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_stride: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_policy: Option<StepPolicy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<TolerancesDoc>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_per_us: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub revival_prominence: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory_csv: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary_json: Option<bool>,
}

/// On-disk form of a scenario; every field optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<PresetId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<CoefficientsDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub couplings: Option<CouplingsDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lasers: Option<LasersDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integrator: Option<IntegratorDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputDoc>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureSettings {
    pub epsilon_per_us: f64,
    pub revival_prominence: f64,
}

impl Default for MeasureSettings {
    fn default() -> Self {
        Self { epsilon_per_us: DEFAULT_EPSILON, revival_prominence: DEFAULT_PROMINENCE }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputSettings {
    pub out_dir: PathBuf,
    pub trajectory_csv: bool,
    pub summary_json: bool,
}

impl Default for OutputSettings {
    fn default() -> Self {
        Self { out_dir: PathBuf::from("out"), trajectory_csv: true, summary_json: true }
    }
}

/// Fully resolved scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub physics: PhysicalScenario,
    pub integrator: IntegratorConfig,
    pub measure: MeasureSettings,
    pub output: OutputSettings,
}

fn pick<T: Copy>(over: Option<T>, base: Option<T>, path: &str) -> Result<T, ConfigError> {
    over.or(base).ok_or_else(|| ConfigError::invalid(path, "missing value"))
}

/// Apply `doc` on top of `base` (or on top of nothing).
pub fn resolve(doc: &ConfigDocument) -> Result<ScenarioConfig, ConfigError> {
    let base = doc.preset.map(preset);
    if doc.geometry.is_some() && doc.couplings.is_some() {
        return Err(ConfigError::invalid("couplings", "set either geometry or couplings, not both"));
    }

    let couplings = if let Some(c) = &doc.couplings {
        if doc.coefficients.is_some() {
            return Err(ConfigError::invalid("coefficients", "only used with geometry"));
        }
        let derived = match &base {
            Some(b) => {
                Some(b.physics.couplings.resolve().map_err(|e| ConfigError::invalid("preset", e.to_string()))?.to_mhz())
            }
            None => None,
        };
        CouplingSource::Direct {
            j: pick(c.j, derived.map(|d| d[0]), "couplings.J_MHz_over_2pi")?,
            u1: pick(c.u1, derived.map(|d| d[1]), "couplings.U1_MHz_over_2pi")?,
            u2: pick(c.u2, derived.map(|d| d[2]), "couplings.U2_MHz_over_2pi")?,
        }
    } else {
        let (base_geom, base_coeff, base_direct) = match base.as_ref().map(|b| b.physics.couplings) {
            Some(CouplingSource::Geometry { geometry, coefficients }) => (Some(geometry), Some(coefficients), None),
            Some(direct @ CouplingSource::Direct { .. }) => (None, None, Some(direct)),
            None => (None, None, None),
        };
        match (&doc.geometry, base_direct) {
            (None, Some(direct)) => {
                if doc.coefficients.is_some() {
                    return Err(ConfigError::invalid("coefficients", "only used with geometry"));
                }
                direct
            }
            (None, None) if base_geom.is_none() => {
                return Err(ConfigError::invalid("geometry", "need a preset, geometry or couplings"));
            }
            (geom_doc, _) => {
                let g = geom_doc.clone().unwrap_or_default();
                let geometry = Geometry {
                    r: pick(g.r_um, base_geom.map(|b| b.r), "geometry.R_um")?,
                    rd1: pick(g.rd1_um, base_geom.map(|b| b.rd1), "geometry.RD1_um")?,
                    rd2: pick(g.rd2_um, base_geom.map(|b| b.rd2), "geometry.RD2_um")?,
                };
                let c = doc.coefficients.clone().unwrap_or_default();
                let bc = base_coeff.unwrap_or_default();
                let coefficients = InteractionCoefficients {
                    c3: c.c3.unwrap_or(bc.c3),
                    c4_rp: c.c4_rp.unwrap_or(bc.c4_rp),
                    c6_rs: c.c6_rs.unwrap_or(bc.c6_rs),
                };
                CouplingSource::Geometry { geometry, coefficients }
            }
        }
    };

    let bl = base.as_ref().map(|b| b.physics.lasers).unwrap_or_default();
    let l = doc.lasers.clone().unwrap_or_default();
    let lasers = LaserParams {
        omega_p: l.omega_p.unwrap_or(bl.omega_p),
        omega_c: l.omega_c.unwrap_or(bl.omega_c),
        delta_p: l.delta_p.unwrap_or(bl.delta_p),
        delta_c: l.delta_c.unwrap_or(bl.delta_c),
        gamma_p: l.gamma_p.unwrap_or(bl.gamma_p),
    };

    let bi = base.as_ref().map(|b| b.integrator).unwrap_or_default();
    let i = doc.integrator.clone().unwrap_or_default();
    let t = i.tolerances.unwrap_or_default();
    let integrator = IntegratorConfig {
        dt: i.dt_us.unwrap_or(bi.dt),
        t_max: i.t_max_us.unwrap_or(bi.t_max),
        output_stride: i.output_stride.unwrap_or(bi.output_stride),
        step_policy: i.step_policy.unwrap_or(bi.step_policy),
        tolerances: Tolerances {
            hermiticity: t.hermiticity.unwrap_or(bi.tolerances.hermiticity),
            trace: t.trace.unwrap_or(bi.tolerances.trace),
            positivity: t.positivity.unwrap_or(bi.tolerances.positivity),
        },
    };

    let bm = base.as_ref().map(|b| b.measure).unwrap_or_default();
    let m = doc.measure.clone().unwrap_or_default();
    let measure = MeasureSettings {
        epsilon_per_us: m.epsilon_per_us.unwrap_or(bm.epsilon_per_us),
        revival_prominence: m.revival_prominence.unwrap_or(bm.revival_prominence),
    };

    let bo = base.as_ref().map(|b| b.output.clone()).unwrap_or_default();
    let o = doc.output.clone().unwrap_or_default();
    let output = OutputSettings {
        out_dir: o.out_dir.unwrap_or(bo.out_dir),
        trajectory_csv: o.trajectory_csv.unwrap_or(bo.trajectory_csv),
        summary_json: o.summary_json.unwrap_or(bo.summary_json),
    };

    let name = doc.name.clone().or_else(|| base.as_ref().map(|b| b.name.clone())).unwrap_or_else(|| "custom".into());
    let cfg = ScenarioConfig { name, physics: PhysicalScenario { couplings, lasers }, integrator, measure, output };
    cfg.validate()?;
    Ok(cfg)
}

impl ScenarioConfig {
    /// Check every value, naming the offending key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        fn finite(path: &str, v: f64) -> Result<(), ConfigError> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::invalid(path, format!("must be finite, got {v}")))
            }
        }
        fn positive(path: &str, v: f64) -> Result<(), ConfigError> {
            finite(path, v)?;
            if v > 0.0 {
                Ok(())
            } else {
                Err(ConfigError::invalid(path, format!("must be positive, got {v}")))
            }
        }
        fn non_negative(path: &str, v: f64) -> Result<(), ConfigError> {
            finite(path, v)?;
            if v >= 0.0 {
                Ok(())
            } else {
                Err(ConfigError::invalid(path, format!("must be non-negative, got {v}")))
            }
        }

        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(ConfigError::invalid("name", "must be a non-empty file-name-safe string"));
        }
        match &self.physics.couplings {
            CouplingSource::Geometry { geometry, coefficients } => {
                positive("geometry.R_um", geometry.r)?;
                positive("geometry.RD1_um", geometry.rd1)?;
                positive("geometry.RD2_um", geometry.rd2)?;
                finite("coefficients.C3_MHz_um3", coefficients.c3)?;
                finite("coefficients.C4rp_MHz_um4", coefficients.c4_rp)?;
                finite("coefficients.C6rs_MHz_um6", coefficients.c6_rs)?;
            }
            CouplingSource::Direct { j, u1, u2 } => {
                finite("couplings.J_MHz_over_2pi", *j)?;
                finite("couplings.U1_MHz_over_2pi", *u1)?;
                finite("couplings.U2_MHz_over_2pi", *u2)?;
            }
        }
        let l = &self.physics.lasers;
        non_negative("lasers.omega_p_MHz_over_2pi", l.omega_p)?;
        non_negative("lasers.omega_c_MHz_over_2pi", l.omega_c)?;
        finite("lasers.delta_p_MHz_over_2pi", l.delta_p)?;
        finite("lasers.delta_c_MHz_over_2pi", l.delta_c)?;
        non_negative("lasers.gamma_p_MHz_over_2pi", l.gamma_p)?;

        let i = &self.integrator;
        positive("integrator.dt_us", i.dt)?;
        positive("integrator.t_max_us", i.t_max)?;
        if i.t_max < i.dt {
            return Err(ConfigError::invalid("integrator.t_max_us", "must be at least dt_us"));
        }
        if i.output_stride == 0 {
            return Err(ConfigError::invalid("integrator.output_stride", "must be at least 1"));
        }
        positive("integrator.tolerances.hermiticity", i.tolerances.hermiticity)?;
        positive("integrator.tolerances.trace", i.tolerances.trace)?;
        positive("integrator.tolerances.positivity", i.tolerances.positivity)?;
        non_negative("measure.epsilon_per_us", self.measure.epsilon_per_us)?;
        non_negative("measure.revival_prominence", self.measure.revival_prominence)?;
        Ok(())
    }

    /// Fully populated document; parsing it gives back `self`.
    pub fn to_document(&self) -> ConfigDocument {
        let (geometry, coefficients, couplings) = match self.physics.couplings {
            CouplingSource::Geometry { geometry, coefficients } => (
                Some(GeometryDoc { r_um: Some(geometry.r), rd1_um: Some(geometry.rd1), rd2_um: Some(geometry.rd2) }),
                Some(CoefficientsDoc {
                    c3: Some(coefficients.c3),
                    c4_rp: Some(coefficients.c4_rp),
                    c6_rs: Some(coefficients.c6_rs),
                }),
                None,
            ),
            CouplingSource::Direct { j, u1, u2 } => {
                (None, None, Some(CouplingsDoc { j: Some(j), u1: Some(u1), u2: Some(u2) }))
            }
        };
        let l = self.physics.lasers;
        let i = self.integrator;
        ConfigDocument {
            preset: None,
            name: Some(self.name.clone()),
            geometry,
            coefficients,
            couplings,
            lasers: Some(LasersDoc {
                omega_p: Some(l.omega_p),
                omega_c: Some(l.omega_c),
                delta_p: Some(l.delta_p),
                delta_c: Some(l.delta_c),
                gamma_p: Some(l.gamma_p),
            }),
            integrator: Some(IntegratorDoc {
                dt_us: Some(i.dt),
                t_max_us: Some(i.t_max),
                output_stride: Some(i.output_stride),
                step_policy: Some(i.step_policy),
                tolerances: Some(TolerancesDoc {
                    hermiticity: Some(i.tolerances.hermiticity),
                    trace: Some(i.tolerances.trace),
                    positivity: Some(i.tolerances.positivity),
                }),
            }),
            measure: Some(MeasureDoc {
                epsilon_per_us: Some(self.measure.epsilon_per_us),
                revival_prominence: Some(self.measure.revival_prominence),
            }),
            output: Some(OutputDoc {
                out_dir: Some(self.output.out_dir.clone()),
                trajectory_csv: Some(self.output.trajectory_csv),
                summary_json: Some(self.output.summary_json),
            }),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("config document serializes")
    }
}

/// Deserialize a document, reporting the key path of any schema violation.
pub fn parse_document(text: &str) -> Result<ConfigDocument, ConfigError> {
    parse_document_as(text)
}

pub(crate) fn parse_document_as<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::invalid(if path == "." { "<root>".to_string() } else { path }, e.into_inner().to_string())
    })
}

/// Parse and resolve a JSON scenario.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    resolve(&parse_document(text)?)
}
