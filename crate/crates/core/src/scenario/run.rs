//! End-to-end run of one scenario: propagate both initial states, measure,
//! and write the trajectory CSV and summary JSON.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use super::config::ScenarioConfig;
use crate::dynamics::{propagate, DynamicsError, Trajectory, TrajectoryDiagnostics};
use crate::measures::{
    detect_revivals, distance_series, non_markovianity, DistanceSeries, MeasureError, NmResult, Revival,
};
use crate::model::{build_full_model, initial_state, EffectiveCouplings, InitialState, ModelError};
use crate::quantum::Diagnostics;

pub const TRAJECTORY_COLUMNS: [&str; 10] = [
    "t_us",
    "pop1_rho1",
    "pop2_rho1",
    "pop_e_rho1",
    "pop_r_rho1",
    "pop1_rho2",
    "D_S",
    "sigma_S_per_us",
    "D_full",
    "trace_defect",
];

#[derive(Debug, Error)]
pub enum RunError {
    #[error("model: {0}")]
    Model(#[from] ModelError),
    #[error("propagating {which}: {source}")]
    Dynamics { which: &'static str, source: DynamicsError },
    #[error("measures: {0}")]
    Measure(#[from] MeasureError),
}

impl RunError {
    /// True when the integrator aborted on a validity violation.
    pub fn is_integrator_abort(&self) -> bool {
        matches!(self, RunError::Dynamics { source: DynamicsError::InvalidState { .. }, .. })
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub config: ScenarioConfig,
    pub couplings: EffectiveCouplings,
    pub rho1: Trajectory,
    pub rho2: Trajectory,
    pub distances: DistanceSeries,
    pub nm: NmResult,
    pub revivals: Vec<Revival>,
}

/// Propagate `ρ₁(0)` and `ρ₂(0)` and evaluate the measures.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutput, RunError> {
    let model = build_full_model(&cfg.physics)?;
    let run = |which: InitialState, name: &'static str| {
        propagate(&initial_state(which), &model, &cfg.integrator)
            .map_err(|source| RunError::Dynamics { which: name, source })
    };
    let rho1 = run(InitialState::State1, "rho1")?;
    let rho2 = run(InitialState::State2, "rho2")?;
    let distances = distance_series(&rho1, &rho2)?;
    let nm = non_markovianity(&distances, cfg.measure.epsilon_per_us);
    let revivals = detect_revivals(&rho1.times, &rho1.pop1(), cfg.measure.revival_prominence);
    Ok(RunOutput { config: cfg.clone(), couplings: model.couplings, rho1, rho2, distances, nm, revivals })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FinalPops {
    pub pop1_rho1: f64,
    pub pop2_rho1: f64,
    pub pop_e_rho1: f64,
    pub pop_r_rho1: f64,
    pub pop1_rho2: f64,
    pub pop2_rho2: f64,
    pub pop_e_rho2: f64,
    pub pop_r_rho2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryDiagnostics {
    pub max_hermiticity_defect: f64,
    pub max_trace_defect: f64,
    pub min_eigenvalue: f64,
    /// `max |pop1 + pop2 − 1|` over both trajectories.
    pub max_population_drift: f64,
    /// Largest step-to-step increase of `D_full`.
    pub max_full_distance_increase: f64,
    /// `max (D_S − D_full)`.
    pub max_reduced_excess: f64,
    pub partial: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CouplingsSummary {
    #[serde(rename = "J_MHz_over_2pi")]
    pub j: f64,
    #[serde(rename = "U1_MHz_over_2pi")]
    pub u1: f64,
    #[serde(rename = "U2_MHz_over_2pi")]
    pub u2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub name: String,
    #[serde(rename = "N")]
    pub n: f64,
    pub positive_intervals: Vec<(f64, f64)>,
    pub revivals: Vec<Revival>,
    pub final_pops: FinalPops,
    pub diagnostics: SummaryDiagnostics,
    pub couplings: CouplingsSummary,
    pub epsilon_per_us: f64,
    pub grid_spacing_us: f64,
    pub dt_us: f64,
    pub t_max_us: f64,
}

/// Summary written when the integrator aborts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AbortSummary {
    pub name: String,
    pub error: String,
    pub trajectory: Option<&'static str>,
    pub abort_time_us: Option<f64>,
    pub abort_diagnostics: Option<Diagnostics>,
    pub partial: bool,
}

impl RunOutput {
    pub fn summary(&self) -> Summary {
        let last1 = self.rho1.observables.last().expect("non-empty trajectory");
        let last2 = self.rho2.observables.last().expect("non-empty trajectory");
        let diag: TrajectoryDiagnostics = self.rho1.diagnostics.merge(&self.rho2.diagnostics);
        let drift = self
            .rho1
            .observables
            .iter()
            .chain(&self.rho2.observables)
            .map(|o| (o.pop1 + o.pop2 - 1.0).abs())
            .fold(0.0, f64::max);
        let d = &self.distances;
        let full_inc = d.d_full.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        let excess = d.d_system.iter().zip(&d.d_full).map(|(s, f)| s - f).fold(f64::NEG_INFINITY, f64::max);
        let [j, u1, u2] = self.couplings.to_mhz();
        Summary {
            name: self.config.name.clone(),
            n: self.nm.n,
            positive_intervals: self.nm.positive_intervals.clone(),
            revivals: self.revivals.clone(),
            final_pops: FinalPops {
                pop1_rho1: last1.pop1,
                pop2_rho1: last1.pop2,
                pop_e_rho1: last1.pop_e,
                pop_r_rho1: last1.pop_r,
                pop1_rho2: last2.pop1,
                pop2_rho2: last2.pop2,
                pop_e_rho2: last2.pop_e,
                pop_r_rho2: last2.pop_r,
            },
            diagnostics: SummaryDiagnostics {
                max_hermiticity_defect: diag.max_hermiticity_defect,
                max_trace_defect: diag.max_trace_defect,
                min_eigenvalue: diag.min_eigenvalue,
                max_population_drift: drift,
                max_full_distance_increase: full_inc,
                max_reduced_excess: excess,
                partial: false,
            },
            couplings: CouplingsSummary { j, u1, u2 },
            epsilon_per_us: self.nm.epsilon,
            grid_spacing_us: self.nm.grid_spacing,
            dt_us: self.config.integrator.dt,
            t_max_us: self.config.integrator.t_max,
        }
    }

    /// Trajectory table, floats at 12 significant digits.
    pub fn trajectory_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(TRAJECTORY_COLUMNS).expect("in-memory write");
        let d = &self.distances;
        for k in 0..d.times.len() {
            let o1 = &self.rho1.observables[k];
            let o2 = &self.rho2.observables[k];
            let row = [
                d.times[k],
                o1.pop1,
                o1.pop2,
                o1.pop_e,
                o1.pop_r,
                o2.pop1,
                d.d_system[k],
                d.sigma_system[k],
                d.d_full[k],
                o1.trace_defect.max(o2.trace_defect),
            ];
            w.write_record(row.iter().map(|x| format_float(*x))).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    pub fn trajectory_path(&self, dir: &Path) -> PathBuf {
        dir.join(format!("{}_trajectory.csv", self.config.name))
    }

    pub fn summary_path(&self, dir: &Path) -> PathBuf {
        dir.join(format!("{}_summary.json", self.config.name))
    }

    /// Write the enabled artifacts into `dir`, returning their paths.
    pub fn write(&self, dir: &Path) -> io::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        if self.config.output.trajectory_csv {
            let p = self.trajectory_path(dir);
            fs::write(&p, self.trajectory_csv())?;
            written.push(p);
        }
        if self.config.output.summary_json {
            let p = self.summary_path(dir);
            fs::write(&p, serde_json::to_string_pretty(&self.summary()).map_err(io::Error::other)?)?;
            written.push(p);
        }
        Ok(written)
    }
}

/// Record a failed run next to where its outputs would have gone.
pub fn write_abort_summary(cfg: &ScenarioConfig, err: &RunError, dir: &Path) -> io::Result<PathBuf> {
    let (trajectory, abort_time_us, abort_diagnostics, partial) = match err {
        RunError::Dynamics { which, source: DynamicsError::InvalidState { time, diagnostics, partial } } => {
            (Some(*which), Some(*time), Some(*diagnostics), partial.as_ref().is_some_and(|p| !p.is_empty()))
        }
        RunError::Dynamics { which, .. } => (Some(*which), None, None, false),
        _ => (None, None, None, false),
    };
    let summary = AbortSummary {
        name: cfg.name.clone(),
        error: err.to_string(),
        trajectory,
        abort_time_us,
        abort_diagnostics,
        partial,
    };
    fs::create_dir_all(dir)?;
    let p = dir.join(format!("{}_summary.json", cfg.name));
    fs::write(&p, serde_json::to_string_pretty(&summary).map_err(io::Error::other)?)?;
    Ok(p)
}

/// Scientific notation with 12 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.11e}")
}
