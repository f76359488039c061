//! Browser bindings: run a scenario, scan the detector's EIT response, and
//! turn atom positions into couplings. Every export takes and returns JSON
//! text so the page needs no generated type glue beyond strings.
//!
//! The plain functions carry the logic and are tested natively; the
//! `#[wasm_bindgen]` wrappers only convert errors into JS exceptions.

use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

use rydnm::dynamics::{detector_only_propagate, IntegratorConfig};
use rydnm::measures::Revival;
use rydnm::model::{angular, derive_couplings, detector, Geometry, InteractionCoefficients, LaserParams};
use rydnm::quantum::{ComplexMatrix, DensityMatrix};
use rydnm::scenario::{parse_config, run_scenario};

#[derive(Debug, Serialize)]
pub struct Simulation {
    pub name: String,
    pub times: Vec<f64>,
    pub pop1_rho1: Vec<f64>,
    pub pop1_rho2: Vec<f64>,
    pub d_s: Vec<f64>,
    pub sigma_s: Vec<f64>,
    #[serde(rename = "N")]
    pub n: f64,
    pub revivals: Vec<Revival>,
    pub couplings_mhz: [f64; 3],
}

/// Run a scenario given as a config document (e.g. `{"preset": "fig3"}`).
pub fn simulate_json(config: &str) -> Result<String, String> {
    let cfg = parse_config(config).map_err(|e| e.to_string())?;
    let out = run_scenario(&cfg).map_err(|e| e.to_string())?;
    let sim = Simulation {
        name: cfg.name.clone(),
        times: out.distances.times.clone(),
        pop1_rho1: out.rho1.pop1(),
        pop1_rho2: out.rho2.pop1(),
        d_s: out.distances.d_system.clone(),
        sigma_s: out.distances.sigma_system.clone(),
        n: out.nm.n,
        revivals: out.revivals.clone(),
        couplings_mhz: out.couplings.to_mhz(),
    };
    serde_json::to_string(&sim).map_err(|e| e.to_string())
}

#[derive(Debug, Deserialize)]
pub struct ScanRequest {
    pub omega_p: f64,
    pub omega_c: f64,
    #[serde(default)]
    pub delta_p: f64,
    #[serde(default)]
    pub delta_c: f64,
    #[serde(default = "default_gamma")]
    pub gamma_p: f64,
    /// Shift of the Rydberg level, MHz/2π.
    pub shift_min: f64,
    pub shift_max: f64,
    pub steps: usize,
    #[serde(default = "default_settle")]
    pub t_us: f64,
}

fn default_gamma() -> f64 {
    6.1
}

fn default_settle() -> f64 {
    10.0
}

#[derive(Debug, Serialize)]
pub struct Scan {
    pub shift: Vec<f64>,
    pub pop_e: Vec<f64>,
}

/// Detector alone, started in |g⟩: excited population after `t_us` as a
/// function of a static Rydberg shift. The dip at zero shift is the dark
/// state; a dimer atom nearby moves the detector off it.
pub fn eit_scan_json(request: &str) -> Result<String, String> {
    let req: ScanRequest = serde_json::from_str(request).map_err(|e| e.to_string())?;
    if req.steps < 2 || req.steps > 401 {
        return Err(format!("steps must be between 2 and 401, got {}", req.steps));
    }
    let lasers = LaserParams {
        omega_p: req.omega_p,
        omega_c: req.omega_c,
        delta_p: req.delta_p,
        delta_c: req.delta_c,
        gamma_p: req.gamma_p,
    };
    let cfg = IntegratorConfig { t_max: req.t_us, output_stride: 1000, ..IntegratorConfig::default() };
    let ground = DensityMatrix::new_unchecked(ComplexMatrix::projector(3, detector::G));
    let mut scan = Scan { shift: Vec::with_capacity(req.steps), pop_e: Vec::with_capacity(req.steps) };
    for k in 0..req.steps {
        let shift = req.shift_min + (req.shift_max - req.shift_min) * k as f64 / (req.steps - 1) as f64;
        let traj = detector_only_propagate(&ground, &lasers, angular(shift), &cfg).map_err(|e| e.to_string())?;
        scan.shift.push(shift);
        scan.pop_e.push(*traj.pop_e.last().expect("at least one sample"));
    }
    serde_json::to_string(&scan).map_err(|e| e.to_string())
}

/// `{"J": .., "U1": .., "U2": ..}` in MHz/2π for the given distances (μm),
/// with the default interaction coefficients.
pub fn couplings_json(r: f64, rd1: f64, rd2: f64) -> Result<String, String> {
    let c =
        derive_couplings(&Geometry { r, rd1, rd2 }, &InteractionCoefficients::default()).map_err(|e| e.to_string())?;
    let [j, u1, u2] = c.to_mhz();
    Ok(serde_json::json!({ "J": j, "U1": u1, "U2": u2 }).to_string())
}

#[wasm_bindgen]
pub fn simulate(config: &str) -> Result<String, JsValue> {
    simulate_json(config).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn eit_scan(request: &str) -> Result<String, JsValue> {
    eit_scan_json(request).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn couplings(r: f64, rd1: f64, rd2: f64) -> Result<String, JsValue> {
    couplings_json(r, rd1, rd2).map_err(|e| JsValue::from_str(&e))
}
