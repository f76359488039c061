//! Lindblad propagation of the dimer ⊗ detector density matrix.
//!
//! The master equation
//!
//! ```text
//! dρ/dt = −i[H, ρ] − ½(ρK†K + K†Kρ − 2KρK†)
//! ```
//!
//! is integrated with fixed-step classical RK4. States are kept only at
//! output samples (every `output_stride` inner steps), where they are
//! checked against the density-matrix invariants.

use log::warn;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{build_detector_hamiltonian_shifted, detector, detector_jump_operator, EffectiveModel, LaserParams};
use crate::quantum::{
    partial_trace_detector, validate_density_matrix, ComplexMatrix, DensityMatrix, Diagnostics, QuantumError,
    Tolerances,
};

/// Upper bound on `dt · ω_max` for the inner step.
pub const MAX_STEP_PRODUCT: f64 = 0.05;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Shape(#[from] QuantumError),
    #[error("invalid integrator configuration: {0}")]
    Config(String),
    #[error(
        "step too large: dt = {dt} us, max rate = {max_rate:.3} rad/us, dt * rate = {product:.4} > {MAX_STEP_PRODUCT}"
    )]
    StepTooLarge { dt: f64, max_rate: f64, product: f64 },
    #[error("state left the density-matrix manifold at t = {time} us: {diagnostics}")]
    InvalidState { time: f64, diagnostics: Diagnostics, partial: Option<Box<Trajectory>> },
}

/// What to do when `dt · ω_max` exceeds [`MAX_STEP_PRODUCT`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepPolicy {
    #[default]
    Reject,
    Warn,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    /// Inner RK4 step, μs.
    pub dt: f64,
    /// Inner steps between recorded samples.
    pub output_stride: usize,
    /// End of the window, μs.
    pub t_max: f64,
    pub tolerances: Tolerances,
    pub step_policy: StepPolicy,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            output_stride: 100,
            t_max: 3.0,
            tolerances: Tolerances::default(),
            step_policy: StepPolicy::Reject,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(DynamicsError::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_max >= self.dt && self.t_max.is_finite()) {
            return Err(DynamicsError::Config(format!("t_max ({}) must be at least dt ({})", self.t_max, self.dt)));
        }
        if self.output_stride == 0 {
            return Err(DynamicsError::Config("output_stride must be at least 1".into()));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }

    /// Spacing of the output grid, μs.
    pub fn sample_spacing(&self) -> f64 {
        self.dt * self.output_stride as f64
    }

    fn check_step(&self, max_rate: f64) -> Result<(), DynamicsError> {
        let product = self.dt * max_rate;
        if product > MAX_STEP_PRODUCT {
            match self.step_policy {
                StepPolicy::Reject => return Err(DynamicsError::StepTooLarge { dt: self.dt, max_rate, product }),
                StepPolicy::Warn => warn!("dt * max rate = {product:.4} exceeds {MAX_STEP_PRODUCT}"),
            }
        }
        Ok(())
    }
}

/// Literal right-hand side of the master equation, for reference and tests.
/// The integrator uses the equivalent [`LindbladGenerator`].
pub fn lindblad_rhs(rho: &ComplexMatrix, h: &ComplexMatrix, k: &ComplexMatrix) -> Result<ComplexMatrix, QuantumError> {
    for m in [h, k] {
        if m.dim() != rho.dim() {
            return Err(QuantumError::DimensionMismatch { expected: rho.dim(), found: m.dim() });
        }
    }
    let minus_i = C64::new(0.0, -1.0);
    let kd = k.adjoint();
    let kdk = &kd * k;
    let unitary = h.commutator(rho).scale(minus_i);
    let anti = &(rho * &kdk) + &(&kdk * rho);
    let jump = &(k * rho) * &kd;
    Ok(&unitary - &(&anti - &jump.scale_real(2.0)).scale_real(0.5))
}

/// Precomputed generator: `dρ/dt = −i(H_eff ρ − ρ H_eff†) + Σ K ρ K†` with
/// `H_eff = H − (i/2) K†K` and `K` stored by its nonzero entries.
#[derive(Clone, Debug)]
pub struct LindbladGenerator {
    dim: usize,
    h_eff: Vec<C64>,
    h_eff_adj: Vec<C64>,
    jump_entries: Vec<(usize, usize, C64)>,
    max_rate: f64,
}

impl LindbladGenerator {
    pub fn new(h: &ComplexMatrix, k: &ComplexMatrix) -> Result<Self, QuantumError> {
        if h.dim() != k.dim() {
            return Err(QuantumError::DimensionMismatch { expected: h.dim(), found: k.dim() });
        }
        let dim = h.dim();
        let kdk = &k.adjoint() * k;
        let h_eff = h - &kdk.scale(C64::new(0.0, 0.5));
        let mut jump_entries = Vec::new();
        let mut max_jump = 0.0_f64;
        for i in 0..dim {
            for j in 0..dim {
                let v = k[(i, j)];
                if v != C64::new(0.0, 0.0) {
                    jump_entries.push((i, j, v));
                    max_jump = max_jump.max(v.norm_sqr());
                }
            }
        }
        Ok(Self {
            dim,
            h_eff_adj: h_eff.adjoint().as_slice().to_vec(),
            h_eff: h_eff.as_slice().to_vec(),
            jump_entries,
            max_rate: h.max_abs().max(max_jump),
        })
    }

    pub fn from_model(model: &EffectiveModel) -> Result<Self, QuantumError> {
        Self::new(&model.hamiltonian, &model.jump)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest rate appearing in the generator, rad/μs.
    pub fn max_rate(&self) -> f64 {
        self.max_rate
    }

    /// `out = L[rho]` on row-major slices of length `dim²`.
    pub fn apply(&self, rho: &[C64], out: &mut [C64]) {
        let n = self.dim;
        debug_assert_eq!(rho.len(), n * n);
        debug_assert_eq!(out.len(), n * n);
        let minus_i = C64::new(0.0, -1.0);
        for i in 0..n {
            for j in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for m in 0..n {
                    acc += self.h_eff[i * n + m] * rho[m * n + j] - rho[i * n + m] * self.h_eff_adj[m * n + j];
                }
                out[i * n + j] = minus_i * acc;
            }
        }
        for &(a, i, ka) in &self.jump_entries {
            for &(b, j, kb) in &self.jump_entries {
                out[a * n + b] += ka * rho[i * n + j] * kb.conj();
            }
        }
    }
}

/// Scratch buffers for one RK4 integration.
struct Rk4 {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
}

impl Rk4 {
    fn new(len: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); len];
        Self { k1: z.clone(), k2: z.clone(), k3: z.clone(), k4: z.clone(), tmp: z }
    }

    fn step(&mut self, gen: &LindbladGenerator, rho: &mut [C64], dt: f64) {
        let half = 0.5 * dt;
        gen.apply(rho, &mut self.k1);
        for ((t, r), k) in self.tmp.iter_mut().zip(rho.iter()).zip(&self.k1) {
            *t = r + k * half;
        }
        gen.apply(&self.tmp, &mut self.k2);
        for ((t, r), k) in self.tmp.iter_mut().zip(rho.iter()).zip(&self.k2) {
            *t = r + k * half;
        }
        gen.apply(&self.tmp, &mut self.k3);
        for ((t, r), k) in self.tmp.iter_mut().zip(rho.iter()).zip(&self.k3) {
            *t = r + k * dt;
        }
        gen.apply(&self.tmp, &mut self.k4);
        let sixth = dt / 6.0;
        for (idx, r) in rho.iter_mut().enumerate() {
            *r += (self.k1[idx] + (self.k2[idx] + self.k3[idx]) * 2.0 + self.k4[idx]) * sixth;
        }
    }
}

struct Sample {
    time: f64,
    state: DensityMatrix,
    diagnostics: Diagnostics,
}

struct Aborted {
    samples: Vec<Sample>,
    time: f64,
    diagnostics: Diagnostics,
}

fn integrate(rho0: &DensityMatrix, gen: &LindbladGenerator, cfg: &IntegratorConfig) -> Result<Vec<Sample>, Aborted> {
    let n_steps = cfg.steps();
    let mut rho = rho0.matrix().as_slice().to_vec();
    let mut rk = Rk4::new(rho.len());
    let mut samples = Vec::with_capacity(n_steps / cfg.output_stride + 1);
    for step in 0..=n_steps {
        if step % cfg.output_stride == 0 {
            let time = step as f64 * cfg.dt;
            let state = DensityMatrix::new_unchecked(
                ComplexMatrix::from_entries(gen.dim(), rho.clone()).expect("state buffer has dim² entries"),
            );
            let diagnostics = validate_density_matrix(&state, &cfg.tolerances);
            if !diagnostics.is_valid() {
                return Err(Aborted { samples, time, diagnostics });
            }
            samples.push(Sample { time, state, diagnostics });
        }
        if step < n_steps {
            rk.step(gen, &mut rho, cfg.dt);
        }
    }
    Ok(samples)
}

/// Per-sample observables of a full-space trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    /// Population of dimer state |1⟩.
    pub pop1: f64,
    pub pop2: f64,
    /// Detector populations of |e⟩ and |r⟩.
    pub pop_e: f64,
    pub pop_r: f64,
    pub trace_defect: f64,
}

/// Worst-case invariant figures over all samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryDiagnostics {
    pub max_hermiticity_defect: f64,
    pub max_trace_defect: f64,
    pub min_eigenvalue: f64,
}

impl TrajectoryDiagnostics {
    fn accumulate<'a>(diags: impl Iterator<Item = &'a Diagnostics>) -> Self {
        diags.fold(
            Self { max_hermiticity_defect: 0.0, max_trace_defect: 0.0, min_eigenvalue: f64::INFINITY },
            |acc, d| Self {
                max_hermiticity_defect: acc.max_hermiticity_defect.max(d.hermiticity_defect),
                max_trace_defect: acc.max_trace_defect.max(d.trace_defect),
                min_eigenvalue: acc.min_eigenvalue.min(d.min_eigenvalue),
            },
        )
    }

    /// Combine two trajectories' figures.
    pub fn merge(&self, other: &Self) -> Self {
        Self {
            max_hermiticity_defect: self.max_hermiticity_defect.max(other.max_hermiticity_defect),
            max_trace_defect: self.max_trace_defect.max(other.max_trace_defect),
            min_eigenvalue: self.min_eigenvalue.min(other.min_eigenvalue),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub full_states: Vec<DensityMatrix>,
    pub reduced_states: Vec<DensityMatrix>,
    pub observables: Vec<Observables>,
    pub diagnostics: TrajectoryDiagnostics,
}

impl Trajectory {
    fn from_samples(samples: Vec<Sample>, model: &EffectiveModel) -> Self {
        let layout = model.layout;
        let diagnostics = TrajectoryDiagnostics::accumulate(samples.iter().map(|s| &s.diagnostics));
        let mut times = Vec::with_capacity(samples.len());
        let mut full_states = Vec::with_capacity(samples.len());
        let mut reduced_states = Vec::with_capacity(samples.len());
        let mut observables = Vec::with_capacity(samples.len());
        for s in samples {
            let reduced = partial_trace_detector(&s.state, &layout).expect("full state has layout dimension");
            let pop_det = |k: usize| s.state.population(layout.index(0, k)) + s.state.population(layout.index(1, k));
            observables.push(Observables {
                pop1: reduced.population(0),
                pop2: reduced.population(1),
                pop_e: pop_det(detector::E),
                pop_r: pop_det(detector::R),
                trace_defect: s.diagnostics.trace_defect,
            });
            times.push(s.time);
            full_states.push(s.state);
            reduced_states.push(reduced);
        }
        Self { times, full_states, reduced_states, observables, diagnostics }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn pop1(&self) -> Vec<f64> {
        self.observables.iter().map(|o| o.pop1).collect()
    }

    pub fn pop_e(&self) -> Vec<f64> {
        self.observables.iter().map(|o| o.pop_e).collect()
    }
}

/// Propagate `rho0` under the model's master equation.
pub fn propagate(
    rho0: &DensityMatrix,
    model: &EffectiveModel,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, DynamicsError> {
    cfg.validate()?;
    if rho0.dim() != model.layout.full_dim() {
        return Err(QuantumError::DimensionMismatch { expected: model.layout.full_dim(), found: rho0.dim() }.into());
    }
    let gen = LindbladGenerator::from_model(model)?;
    cfg.check_step(gen.max_rate())?;
    integrate(rho0, &gen, cfg).map(|s| Trajectory::from_samples(s, model)).map_err(|a| DynamicsError::InvalidState {
        time: a.time,
        diagnostics: a.diagnostics,
        partial: Some(Box::new(Trajectory::from_samples(a.samples, model))),
    })
}

/// Sampled detector-only evolution.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectorTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub pop_g: Vec<f64>,
    pub pop_e: Vec<f64>,
    pub pop_r: Vec<f64>,
    pub diagnostics: TrajectoryDiagnostics,
}

/// Detector alone, with an optional static shift of |r⟩ (rad/μs), which is
/// how a dimer frozen in |1⟩ or |2⟩ acts on it.
pub fn detector_only_propagate(
    rho0: &DensityMatrix,
    lasers: &LaserParams,
    shift: f64,
    cfg: &IntegratorConfig,
) -> Result<DetectorTrajectory, DynamicsError> {
    cfg.validate()?;
    lasers.validate().map_err(|e| DynamicsError::Config(e.to_string()))?;
    if rho0.dim() != 3 {
        return Err(QuantumError::DimensionMismatch { expected: 3, found: rho0.dim() }.into());
    }
    let h = build_detector_hamiltonian_shifted(lasers, shift);
    let gen = LindbladGenerator::new(&h, &detector_jump_operator(lasers.gamma_p))?;
    cfg.check_step(gen.max_rate())?;
    let build = |samples: Vec<Sample>| {
        let diagnostics = TrajectoryDiagnostics::accumulate(samples.iter().map(|s| &s.diagnostics));
        let mut out = DetectorTrajectory {
            times: Vec::with_capacity(samples.len()),
            states: Vec::with_capacity(samples.len()),
            pop_g: Vec::with_capacity(samples.len()),
            pop_e: Vec::with_capacity(samples.len()),
            pop_r: Vec::with_capacity(samples.len()),
            diagnostics,
        };
        for s in samples {
            out.times.push(s.time);
            out.pop_g.push(s.state.population(detector::G));
            out.pop_e.push(s.state.population(detector::E));
            out.pop_r.push(s.state.population(detector::R));
            out.states.push(s.state);
        }
        out
    };
    integrate(rho0, &gen, cfg).map(build).map_err(|a| DynamicsError::InvalidState {
        time: a.time,
        diagnostics: a.diagnostics,
        partial: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        angular, build_full_model, dark_state, initial_state, CouplingSource, InitialState, PhysicalScenario,
    };
    use crate::quantum::{tensor_product, testing::random_density};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model(j: f64, u1: f64, u2: f64, lasers: LaserParams) -> EffectiveModel {
        build_full_model(&PhysicalScenario { couplings: CouplingSource::Direct { j, u1, u2 }, lasers }).unwrap()
    }

    #[test]
    fn rhs_zero_generator() {
        let rho = ComplexMatrix::projector(6, 0);
        let out = lindblad_rhs(&rho, &ComplexMatrix::zeros(6), &ComplexMatrix::zeros(6)).unwrap();
        assert_eq!(out, ComplexMatrix::zeros(6));
    }

    #[test]
    fn rhs_decay_of_excited_detector() {
        let gamma = 6.1;
        let l = detector_jump_operator(gamma);
        let rho = ComplexMatrix::projector(3, detector::E);
        let out = lindblad_rhs(&rho, &ComplexMatrix::zeros(3), &l).unwrap();
        let g = angular(gamma);
        let expected = ComplexMatrix::real_diagonal(&[g, -g, 0.0]);
        assert!(out.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn rhs_vanishes_on_dark_state() {
        let lasers = LaserParams { omega_p: 6.0, omega_c: 20.0, ..Default::default() };
        let m = model(0.0, 0.0, 0.0, lasers);
        let dark = ComplexMatrix::outer(&dark_state(&lasers));
        let rho = tensor_product(&ComplexMatrix::projector(2, 0), &dark);
        let out = lindblad_rhs(&rho, &m.hamiltonian, &m.jump).unwrap();
        assert!(out.max_abs() < 1e-12);
    }

    #[test]
    fn rhs_shape_mismatch() {
        assert!(lindblad_rhs(&ComplexMatrix::zeros(6), &ComplexMatrix::zeros(3), &ComplexMatrix::zeros(6)).is_err());
    }

    #[test]
    fn config_validation() {
        let bad = IntegratorConfig { dt: 0.0, ..Default::default() };
        assert!(matches!(bad.validate(), Err(DynamicsError::Config(_))));
        let bad = IntegratorConfig { output_stride: 0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = IntegratorConfig { t_max: 1e-5, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn step_too_large_is_rejected_or_warned() {
        let lasers = LaserParams { omega_p: 30.0, omega_c: 30.0, delta_p: -50.0, delta_c: 50.0, gamma_p: 6.1 };
        let m = model(3.0, -36.0, -0.8, lasers);
        let cfg = IntegratorConfig { dt: 1e-3, t_max: 0.01, output_stride: 1, ..Default::default() };
        assert!(matches!(
            propagate(&initial_state(InitialState::State1), &m, &cfg),
            Err(DynamicsError::StepTooLarge { .. })
        ));
        // Under the warn policy the run proceeds; at this coarse step the state
        // quality is poor, so only the policy itself is checked here.
        let loose = Tolerances { positivity: 1.0, trace: 1.0, hermiticity: 1.0 };
        let cfg = IntegratorConfig { step_policy: StepPolicy::Warn, tolerances: loose, ..cfg };
        assert!(propagate(&initial_state(InitialState::State1), &m, &cfg).is_ok());
    }

    #[test]
    fn rabi_oscillation_without_environment_coupling() {
        let j_mhz = 1.0;
        let m = model(j_mhz, 0.0, 0.0, LaserParams { gamma_p: 0.0, ..Default::default() });
        let cfg = IntegratorConfig { t_max: 1.0, ..Default::default() };
        let traj = propagate(&initial_state(InitialState::State1), &m, &cfg).unwrap();
        let j = angular(j_mhz);
        for (t, o) in traj.times.iter().zip(&traj.observables) {
            assert!((o.pop1 - (j * t).cos().powi(2)).abs() < 1e-9);
        }
        let quarter = std::f64::consts::FRAC_PI_2 / j;
        let cfg = IntegratorConfig { t_max: quarter, dt: quarter / 1000.0, output_stride: 1000, ..Default::default() };
        let traj = propagate(&initial_state(InitialState::State1), &m, &cfg).unwrap();
        assert!(traj.observables.last().unwrap().pop1.abs() < 1e-10);
    }

    #[test]
    fn unitary_limit_conserves_purity() {
        let lasers = LaserParams { omega_p: 30.0, omega_c: 30.0, delta_p: -20.0, delta_c: 20.0, gamma_p: 0.0 };
        let m = model(1.89, -4.0, -0.11, lasers);
        // A pure state sits on the boundary of the positive cone, so RK4
        // truncation error shows up directly as negative eigenvalues; a finer
        // step keeps them well inside tolerance.
        let cfg = IntegratorConfig { t_max: 1.0, dt: 2.5e-5, output_stride: 400, ..Default::default() };
        let traj = propagate(&initial_state(InitialState::State1), &m, &cfg).unwrap();
        for s in &traj.full_states {
            assert!((s.purity() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn laser_off_decay_is_exponential() {
        let lasers = LaserParams { gamma_p: 6.1, ..Default::default() };
        let cfg = IntegratorConfig { t_max: 1.0, ..Default::default() };
        let rho0 = DensityMatrix::new_unchecked(ComplexMatrix::projector(3, detector::E));
        let traj = detector_only_propagate(&rho0, &lasers, 0.0, &cfg).unwrap();
        let g = angular(6.1);
        for (t, pe) in traj.times.iter().zip(&traj.pop_e) {
            assert!((pe - (-g * t).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn detector_rejects_wrong_dimension() {
        let err = detector_only_propagate(
            &DensityMatrix::maximally_mixed(2),
            &LaserParams::default(),
            0.0,
            &IntegratorConfig::default(),
        );
        assert!(matches!(err, Err(DynamicsError::Shape(_))));
    }

    #[test]
    fn invalid_start_aborts_at_time_zero() {
        let m = model(1.0, 0.0, 0.0, LaserParams::default());
        let bad = DensityMatrix::new_unchecked(ComplexMatrix::real_diagonal(&[1.2, 0.0, 0.0, -0.2, 0.0, 0.0]));
        match propagate(&bad, &m, &IntegratorConfig { t_max: 0.01, ..Default::default() }) {
            Err(DynamicsError::InvalidState { time, partial, .. }) => {
                assert_eq!(time, 0.0);
                assert!(partial.unwrap().is_empty());
            }
            other => panic!("expected abort, got {other:?}"),
        }
    }

    #[test]
    fn sample_grid_is_uniform() {
        let m = model(1.0, 0.0, 0.0, LaserParams::default());
        let cfg = IntegratorConfig { t_max: 0.5, ..Default::default() };
        let traj = propagate(&initial_state(InitialState::State2), &m, &cfg).unwrap();
        assert_eq!(traj.len(), 51);
        for (k, t) in traj.times.iter().enumerate() {
            assert!((t - 0.01 * k as f64).abs() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn generator_matches_literal_rhs(
            seed in any::<u64>(), j in -5.0..5.0f64, u1 in -40.0..40.0f64, u2 in -2.0..2.0f64,
            op in 0.0..30.0f64, oc in 0.0..30.0f64, dp in -50.0..50.0f64, dc in -50.0..50.0f64, gp in 0.0..10.0f64,
        ) {
            let m = model(j, u1, u2, LaserParams { omega_p: op, omega_c: oc, delta_p: dp, delta_c: dc, gamma_p: gp });
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = random_density(&mut rng, 6).into_matrix();
            let reference = lindblad_rhs(&rho, &m.hamiltonian, &m.jump).unwrap();
            let gen = LindbladGenerator::from_model(&m).unwrap();
            let mut out = vec![C64::new(0.0, 0.0); 36];
            gen.apply(rho.as_slice(), &mut out);
            let fast = ComplexMatrix::from_entries(6, out).unwrap();
            prop_assert!(fast.max_abs_diff(&reference) <= 1e-10 * reference.max_abs().max(1.0));
            prop_assert!(reference.trace().norm() < 1e-10 * reference.max_abs().max(1.0));
            prop_assert!(reference.hermiticity_defect() < 1e-10 * reference.max_abs().max(1.0));
        }
    }
}
