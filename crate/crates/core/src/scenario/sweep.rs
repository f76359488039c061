//! Parameter sweeps over one or two scenario parameters.
//!
//! Cells are independent scenario runs executed on a rayon pool; the table
//! is always emitted in cell-index order.

use std::fmt;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{parse_document_as, resolve, ConfigDocument, ConfigError, ScenarioConfig};
use super::run::{format_float, run_scenario};
use crate::measures::{dephasing_half_life, steady_value};
use crate::model::CouplingSource;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParam {
    R,
    RD1,
    RD2,
    #[serde(rename = "omega_p")]
    OmegaP,
    #[serde(rename = "omega_c")]
    OmegaC,
    #[serde(rename = "delta_p")]
    DeltaP,
    #[serde(rename = "delta_c")]
    DeltaC,
    #[serde(rename = "gamma_p")]
    GammaP,
    J,
    U1,
    U2,
}

impl SweepParam {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepParam::R => "R",
            SweepParam::RD1 => "RD1",
            SweepParam::RD2 => "RD2",
            SweepParam::OmegaP => "omega_p",
            SweepParam::OmegaC => "omega_c",
            SweepParam::DeltaP => "delta_p",
            SweepParam::DeltaC => "delta_c",
            SweepParam::GammaP => "gamma_p",
            SweepParam::J => "J",
            SweepParam::U1 => "U1",
            SweepParam::U2 => "U2",
        }
    }

    fn is_geometric(&self) -> bool {
        matches!(self, SweepParam::R | SweepParam::RD1 | SweepParam::RD2)
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One swept axis: either `min`/`max`/`steps` (linear, steps ≥ 2) or an
/// explicit `values` list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub name: SweepParam,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl SweepAxis {
    pub fn linear(name: SweepParam, min: f64, max: f64, steps: usize) -> Self {
        Self { name, min: Some(min), max: Some(max), steps: Some(steps), values: None }
    }

    pub fn list(name: SweepParam, values: Vec<f64>) -> Self {
        Self { name, min: None, max: None, steps: None, values: Some(values) }
    }

    fn grid(&self, path: &str) -> Result<Vec<f64>, ConfigError> {
        let values = match (&self.values, self.min, self.max, self.steps) {
            (Some(v), None, None, None) => {
                if v.is_empty() {
                    return Err(ConfigError::invalid(format!("{path}.values"), "must not be empty"));
                }
                v.clone()
            }
            (None, Some(min), Some(max), Some(steps)) => {
                if steps < 2 {
                    return Err(ConfigError::invalid(format!("{path}.steps"), "must be at least 2"));
                }
                (0..steps)
                    .map(|k| if k == steps - 1 { max } else { min + (max - min) * k as f64 / (steps - 1) as f64 })
                    .collect()
            }
            _ => return Err(ConfigError::invalid(path, "give either values, or all of min, max and steps")),
        };
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(ConfigError::invalid(path, format!("non-finite value {bad}")));
        }
        Ok(values)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub base: ConfigDocument,
    pub parameters: Vec<SweepAxis>,
    /// Keep `Δ_c = −Δ_p` while sweeping either detuning.
    #[serde(default)]
    pub lock_two_photon_resonance: bool,
}

pub fn parse_sweep(text: &str) -> Result<SweepSpec, ConfigError> {
    parse_document_as(text)
}

/// A validated sweep: resolved base config plus the value grid per axis.
#[derive(Clone, Debug)]
pub struct SweepPlan {
    pub name: String,
    pub base: ScenarioConfig,
    pub axes: Vec<(SweepParam, Vec<f64>)>,
    pub lock_two_photon_resonance: bool,
}

impl SweepPlan {
    pub fn new(spec: &SweepSpec) -> Result<Self, ConfigError> {
        let base = resolve(&spec.base).map_err(|e| match e {
            ConfigError::Invalid { path, message } => ConfigError::Invalid { path: format!("base.{path}"), message },
        })?;
        if spec.parameters.is_empty() || spec.parameters.len() > 2 {
            return Err(ConfigError::invalid("parameters", "sweep one or two parameters"));
        }
        if spec.parameters.len() == 2 && spec.parameters[0].name == spec.parameters[1].name {
            return Err(ConfigError::invalid("parameters[1].name", "duplicate parameter"));
        }
        let direct = matches!(base.physics.couplings, CouplingSource::Direct { .. });
        let mut axes = Vec::new();
        for (k, axis) in spec.parameters.iter().enumerate() {
            let path = format!("parameters[{k}]");
            if axis.name.is_geometric() && direct {
                return Err(ConfigError::invalid(
                    format!("{path}.name"),
                    "geometry parameters need a geometry-mode base",
                ));
            }
            axes.push((axis.name, axis.grid(&path)?));
        }
        let names: Vec<SweepParam> = axes.iter().map(|a| a.0).collect();
        if spec.lock_two_photon_resonance && names.contains(&SweepParam::DeltaP) && names.contains(&SweepParam::DeltaC)
        {
            return Err(ConfigError::invalid("lock_two_photon_resonance", "cannot sweep both detunings while locked"));
        }
        let name = spec.name.clone().unwrap_or_else(|| format!("{}_sweep", base.name));
        Ok(Self { name, base, axes, lock_two_photon_resonance: spec.lock_two_photon_resonance })
    }

    pub fn cell_count(&self) -> usize {
        self.axes.iter().map(|a| a.1.len()).product()
    }

    /// Parameter values of cell `index`; the last axis varies fastest.
    pub fn cell_values(&self, index: usize) -> Vec<f64> {
        let mut rem = index;
        let mut out = vec![0.0; self.axes.len()];
        for (slot, (_, grid)) in out.iter_mut().zip(&self.axes).rev() {
            *slot = grid[rem % grid.len()];
            rem /= grid.len();
        }
        out
    }

    /// Base config with the cell's parameter values applied.
    pub fn cell_config(&self, index: usize) -> Result<ScenarioConfig, String> {
        let mut cfg = self.base.clone();
        cfg.name = format!("{}_cell{index}", self.name);
        for (&(param, _), value) in self.axes.iter().zip(self.cell_values(index)) {
            apply(&mut cfg, param, value, self.lock_two_photon_resonance)?;
        }
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

fn apply(cfg: &mut ScenarioConfig, param: SweepParam, value: f64, lock: bool) -> Result<(), String> {
    let lasers = &mut cfg.physics.lasers;
    match param {
        SweepParam::OmegaP => lasers.omega_p = value,
        SweepParam::OmegaC => lasers.omega_c = value,
        SweepParam::GammaP => lasers.gamma_p = value,
        SweepParam::DeltaP => {
            lasers.delta_p = value;
            if lock {
                lasers.delta_c = -value;
            }
        }
        SweepParam::DeltaC => {
            lasers.delta_c = value;
            if lock {
                lasers.delta_p = -value;
            }
        }
        SweepParam::R | SweepParam::RD1 | SweepParam::RD2 => match &mut cfg.physics.couplings {
            CouplingSource::Geometry { geometry, .. } => match param {
                SweepParam::R => geometry.r = value,
                SweepParam::RD1 => geometry.rd1 = value,
                _ => geometry.rd2 = value,
            },
            CouplingSource::Direct { .. } => return Err(format!("{param} needs geometry mode")),
        },
        SweepParam::J | SweepParam::U1 | SweepParam::U2 => {
            let [j, u1, u2] = cfg.physics.couplings.resolve().map_err(|e| e.to_string())?.to_mhz();
            let (mut j, mut u1, mut u2) = (j, u1, u2);
            match param {
                SweepParam::J => j = value,
                SweepParam::U1 => u1 = value,
                _ => u2 = value,
            }
            cfg.physics.couplings = CouplingSource::Direct { j, u1, u2 };
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CellSummary {
    #[serde(rename = "N")]
    pub n: f64,
    pub dephasing_half_life_us: Option<f64>,
    pub steady_pop1: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    pub values: Vec<f64>,
    pub outcome: Result<CellSummary, String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub name: String,
    pub parameters: Vec<SweepParam>,
    pub rows: Vec<SweepRow>,
}

pub fn run_cell(cfg: &ScenarioConfig) -> Result<CellSummary, String> {
    let out = run_scenario(cfg).map_err(|e| e.to_string())?;
    let pop1 = out.rho1.pop1();
    Ok(CellSummary {
        n: out.nm.n,
        dephasing_half_life_us: dephasing_half_life(&out.rho1.times, &pop1),
        steady_pop1: steady_value(&pop1),
    })
}

/// Run every cell. `threads = None` uses all available cores.
pub fn run_sweep(plan: &SweepPlan, threads: Option<usize>) -> Result<SweepTable, rayon::ThreadPoolBuildError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build()?;
    let rows = pool.install(|| {
        (0..plan.cell_count())
            .into_par_iter()
            .map(|index| SweepRow {
                index,
                values: plan.cell_values(index),
                outcome: plan.cell_config(index).and_then(|cfg| run_cell(&cfg)),
            })
            .collect::<Vec<_>>()
    });
    Ok(SweepTable { name: plan.name.clone(), parameters: plan.axes.iter().map(|a| a.0).collect(), rows })
}

impl SweepTable {
    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["cell".to_string()];
        h.extend(self.parameters.iter().map(|p| p.as_str().to_string()));
        h.extend(["N", "dephasing_half_life_us", "steady_pop1", "status"].map(String::from));
        h
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.header()).expect("in-memory write");
        for row in &self.rows {
            let mut rec = vec![row.index.to_string()];
            rec.extend(row.values.iter().map(|v| format_float(*v)));
            match &row.outcome {
                Ok(c) => {
                    rec.push(format_float(c.n));
                    rec.push(c.dephasing_half_life_us.map_or_else(|| "inf".to_string(), format_float));
                    rec.push(format_float(c.steady_pop1));
                    rec.push("ok".to_string());
                }
                Err(e) => {
                    rec.extend(["NaN", "NaN", "NaN"].map(String::from));
                    rec.push(format!("error: {}", e.replace(['\n', '\r'], " ")));
                }
            }
            w.write_record(rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    pub fn path(&self, dir: &Path) -> PathBuf {
        dir.join(format!("{}.csv", self.name))
    }

    pub fn write(&self, dir: &Path) -> io::Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let p = self.path(dir);
        std::fs::write(&p, self.to_csv())?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(params: &str, extra: &str) -> SweepSpec {
        parse_sweep(&format!(
            r#"{{"base": {{"preset": "fig3", "integrator": {{"t_max_us": 0.1}}}}, "parameters": {params}{extra}}}"#
        ))
        .unwrap()
    }

    #[test]
    fn linear_grid_hits_endpoints() {
        let plan = SweepPlan::new(&spec(r#"[{"name": "delta_p", "min": 0, "max": -50, "steps": 6}]"#, "")).unwrap();
        assert_eq!(plan.axes[0].1, vec![0.0, -10.0, -20.0, -30.0, -40.0, -50.0]);
    }

    #[test]
    fn two_axes_row_major() {
        let plan = SweepPlan::new(&spec(
            r#"[{"name": "omega_p", "values": [1, 2]}, {"name": "J", "values": [0.5, 1.0, 1.5]}]"#,
            "",
        ))
        .unwrap();
        assert_eq!(plan.cell_count(), 6);
        assert_eq!(plan.cell_values(0), vec![1.0, 0.5]);
        assert_eq!(plan.cell_values(4), vec![2.0, 1.0]);
        let cfg = plan.cell_config(4).unwrap();
        assert!(matches!(cfg.physics.couplings, CouplingSource::Direct { j, .. } if j == 1.0));
    }

    #[test]
    fn locked_detuning() {
        let plan = SweepPlan::new(&spec(
            r#"[{"name": "delta_p", "values": [-30]}]"#,
            r#", "lock_two_photon_resonance": true"#,
        ))
        .unwrap();
        let cfg = plan.cell_config(0).unwrap();
        assert_eq!(cfg.physics.lasers.delta_p, -30.0);
        assert_eq!(cfg.physics.lasers.delta_c, 30.0);
    }

    #[test]
    fn invalid_specs() {
        let err = parse_sweep(r#"{"base": {"preset": "fig3"}, "parameters": [{"name": "theta", "values": [1]}]}"#)
            .unwrap_err();
        assert!(err.path().starts_with("parameters[0]"), "{err}");

        let err = SweepPlan::new(&spec(r#"[{"name": "R", "min": 1, "max": 2, "steps": 1}]"#, "")).unwrap_err();
        assert_eq!(err.path(), "parameters[0].steps");

        let err = SweepPlan::new(&spec(r#"[]"#, "")).unwrap_err();
        assert_eq!(err.path(), "parameters");

        let s = parse_sweep(r#"{"base": {"couplings": {"J_MHz_over_2pi": 1, "U1_MHz_over_2pi": 0, "U2_MHz_over_2pi": 0}}, "parameters": [{"name": "R", "values": [3]}]}"#).unwrap();
        assert_eq!(SweepPlan::new(&s).unwrap_err().path(), "parameters[0].name");

        let err = parse_sweep(r#"{"base": {"preset": "fig3", "integrator": {"dt_us": -1}}, "parameters": [{"name": "R", "values": [3]}]}"#)
            .map(|s| SweepPlan::new(&s))
            .unwrap()
            .unwrap_err();
        assert_eq!(err.path(), "base.integrator.dt_us");
    }

    #[test]
    fn failed_cells_are_recorded_in_row() {
        let plan = SweepPlan::new(&spec(r#"[{"name": "R", "values": [8.0, -1.0]}]"#, "")).unwrap();
        let table = run_sweep(&plan, Some(2)).unwrap();
        assert_eq!(table.rows.len(), 2);
        assert!(table.rows[0].outcome.is_ok());
        assert!(table.rows[1].outcome.is_err());
        let csv = table.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[2].contains("error: "));
        assert!(lines[1].ends_with(",ok"));
    }

    #[test]
    fn ordering_independent_of_threads() {
        let plan = SweepPlan::new(&spec(r#"[{"name": "omega_p", "values": [5, 10, 15, 20]}]"#, "")).unwrap();
        let a = run_sweep(&plan, Some(1)).unwrap().to_csv();
        let b = run_sweep(&plan, Some(4)).unwrap().to_csv();
        assert_eq!(a, b);
    }
}
