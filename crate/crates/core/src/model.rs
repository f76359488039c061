//! Physical parameters to operators.
//!
//! Configuration values are frequencies divided by 2π, in MHz, and lengths in
//! μm. They are converted once to angular frequency (rad/μs) when operators
//! are built; time is in μs and ħ = 1.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quantum::{tensor_product, ComplexMatrix, DensityMatrix, HilbertLayout};

/// Detector basis indices.
pub mod detector {
    pub const G: usize = 0;
    pub const E: usize = 1;
    pub const R: usize = 2;
}

/// `MHz / 2π` to rad/μs.
pub fn angular(mhz_over_2pi: f64) -> f64 {
    TAU * mhz_over_2pi
}

/// rad/μs to `MHz / 2π`.
pub fn mhz_over_2pi(angular: f64) -> f64 {
    angular / TAU
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("{field} must be strictly positive, got {value}")]
    NonPositiveDistance { field: &'static str, value: f64 },
    #[error("{field} must be non-negative, got {value}")]
    NegativeParameter { field: &'static str, value: f64 },
    #[error("{field} must be finite, got {value}")]
    NonFinite { field: &'static str, value: f64 },
}

/// Dispersion coefficients, `MHz μm^n` (value / 2π).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractionCoefficients {
    /// Resonant dipole-dipole exchange between the dimer pair states.
    pub c3: f64,
    /// Detector |r⟩ with a dimer atom in |p⟩.
    pub c4_rp: f64,
    /// Detector |r⟩ with a dimer atom in |s⟩.
    pub c6_rs: f64,
}

impl Default for InteractionCoefficients {
    fn default() -> Self {
        Self { c3: 1619.0, c4_rp: -1032.0, c6_rs: -87.0 }
    }
}

/// Dimer separation and detector-to-atom distances, μm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub r: f64,
    pub rd1: f64,
    pub rd2: f64,
}

impl Geometry {
    pub fn validate(&self) -> Result<(), ModelError> {
        for (field, value) in [("R", self.r), ("RD1", self.rd1), ("RD2", self.rd2)] {
            if !value.is_finite() {
                return Err(ModelError::NonFinite { field, value });
            }
            if value <= 0.0 {
                return Err(ModelError::NonPositiveDistance { field, value });
            }
        }
        Ok(())
    }
}

/// Probe/control laser settings and the |e⟩ decay rate, all `MHz / 2π`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaserParams {
    pub omega_p: f64,
    pub omega_c: f64,
    pub delta_p: f64,
    pub delta_c: f64,
    pub gamma_p: f64,
}

impl Default for LaserParams {
    fn default() -> Self {
        Self { omega_p: 0.0, omega_c: 0.0, delta_p: 0.0, delta_c: 0.0, gamma_p: 6.1 }
    }
}

impl LaserParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        for (field, value) in [
            ("omega_p", self.omega_p),
            ("omega_c", self.omega_c),
            ("delta_p", self.delta_p),
            ("delta_c", self.delta_c),
            ("gamma_p", self.gamma_p),
        ] {
            if !value.is_finite() {
                return Err(ModelError::NonFinite { field, value });
            }
        }
        for (field, value) in [("omega_p", self.omega_p), ("omega_c", self.omega_c), ("gamma_p", self.gamma_p)] {
            if value < 0.0 {
                return Err(ModelError::NegativeParameter { field, value });
            }
        }
        Ok(())
    }
}

/// Dimer exchange `J` and state-dependent detector shifts `U₁`, `U₂`, in rad/μs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveCouplings {
    pub j: f64,
    pub u1: f64,
    pub u2: f64,
}

impl EffectiveCouplings {
    pub fn from_mhz(j: f64, u1: f64, u2: f64) -> Self {
        Self { j: angular(j), u1: angular(u1), u2: angular(u2) }
    }

    /// `(J, U₁, U₂)` as `MHz / 2π`.
    pub fn to_mhz(&self) -> [f64; 3] {
        [mhz_over_2pi(self.j), mhz_over_2pi(self.u1), mhz_over_2pi(self.u2)]
    }
}

/// `J = C₃/R³`, `U₁ = C₄/R_D1⁴ + C₆/R_D2⁶`, `U₂ = C₆/R_D1⁶ + C₄/R_D2⁴`.
pub fn derive_couplings(geom: &Geometry, coeff: &InteractionCoefficients) -> Result<EffectiveCouplings, ModelError> {
    geom.validate()?;
    let j = coeff.c3 / geom.r.powi(3);
    let u1 = coeff.c4_rp / geom.rd1.powi(4) + coeff.c6_rs / geom.rd2.powi(6);
    let u2 = coeff.c6_rs / geom.rd1.powi(6) + coeff.c4_rp / geom.rd2.powi(4);
    Ok(EffectiveCouplings::from_mhz(j, u1, u2))
}

/// Where the couplings come from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CouplingSource {
    Geometry {
        geometry: Geometry,
        coefficients: InteractionCoefficients,
    },
    /// `J`, `U₁`, `U₂` given directly as `MHz / 2π`.
    Direct {
        j: f64,
        u1: f64,
        u2: f64,
    },
}

impl CouplingSource {
    pub fn resolve(&self) -> Result<EffectiveCouplings, ModelError> {
        match self {
            CouplingSource::Geometry { geometry, coefficients } => derive_couplings(geometry, coefficients),
            CouplingSource::Direct { j, u1, u2 } => {
                for (field, value) in [("J", *j), ("U1", *u1), ("U2", *u2)] {
                    if !value.is_finite() {
                        return Err(ModelError::NonFinite { field, value });
                    }
                }
                Ok(EffectiveCouplings::from_mhz(*j, *u1, *u2))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalScenario {
    pub couplings: CouplingSource,
    pub lasers: LaserParams,
}

/// `H_S = J(|2⟩⟨1| + |1⟩⟨2|)`.
pub fn build_system_hamiltonian(j: f64) -> ComplexMatrix {
    ComplexMatrix::from_real(2, &[0.0, j, j, 0.0]).expect("2x2")
}

/// Detector Hamiltonian in the rotating frame, basis `(g, e, r)`, rad/μs.
pub fn build_detector_hamiltonian(lasers: &LaserParams) -> ComplexMatrix {
    build_detector_hamiltonian_shifted(lasers, 0.0)
}

/// As [`build_detector_hamiltonian`], plus `shift |r⟩⟨r|` (rad/μs). A frozen
/// dimer state shifts the detector Rydberg level this way.
pub fn build_detector_hamiltonian_shifted(lasers: &LaserParams, shift: f64) -> ComplexMatrix {
    use detector::{E, G, R};
    let half_p = angular(lasers.omega_p) / 2.0;
    let half_c = angular(lasers.omega_c) / 2.0;
    let mut h = ComplexMatrix::zeros(3);
    h[(E, G)] = C64::new(half_p, 0.0);
    h[(G, E)] = C64::new(half_p, 0.0);
    h[(R, E)] = C64::new(half_c, 0.0);
    h[(E, R)] = C64::new(half_c, 0.0);
    h[(E, E)] = C64::new(-angular(lasers.delta_p), 0.0);
    h[(R, R)] = C64::new(-angular(lasers.delta_p + lasers.delta_c) + shift, 0.0);
    h
}

/// `L = √Γ_p |g⟩⟨e|`.
pub fn detector_jump_operator(gamma_p: f64) -> ComplexMatrix {
    ComplexMatrix::outer_basis(3, detector::G, detector::E).scale_real(angular(gamma_p).sqrt())
}

/// `H_SD = U₁ |1⟩⟨1| ⊗ |r⟩⟨r| + U₂ |2⟩⟨2| ⊗ |r⟩⟨r|`.
pub fn build_interaction_hamiltonian(c: &EffectiveCouplings) -> ComplexMatrix {
    let r = ComplexMatrix::projector(3, detector::R);
    let one = ComplexMatrix::projector(2, 0).scale_real(c.u1);
    let two = ComplexMatrix::projector(2, 1).scale_real(c.u2);
    &tensor_product(&one, &r) + &tensor_product(&two, &r)
}

/// Assembled operators for the dimer ⊗ detector master equation.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveModel {
    /// Full Hamiltonian, rad/μs.
    pub hamiltonian: ComplexMatrix,
    /// Jump operator `𝟙_S ⊗ L`, √(rad/μs).
    pub jump: ComplexMatrix,
    pub couplings: EffectiveCouplings,
    pub lasers: LaserParams,
    pub layout: HilbertLayout,
}

impl EffectiveModel {
    /// Largest rate in the generator: max of `|H_ij|` and `Γ_p`, rad/μs.
    pub fn max_rate(&self) -> f64 {
        self.hamiltonian.max_abs().max(angular(self.lasers.gamma_p))
    }
}

/// `H = H_S ⊗ 𝟙_D + 𝟙_S ⊗ H_D + H_SD`, `K = 𝟙_S ⊗ L`.
pub fn build_full_model(s: &PhysicalScenario) -> Result<EffectiveModel, ModelError> {
    s.lasers.validate()?;
    let couplings = s.couplings.resolve()?;
    let layout = HilbertLayout::DIMER_DETECTOR;
    let id_s = ComplexMatrix::identity(layout.system_dim);
    let id_d = ComplexMatrix::identity(layout.detector_dim);
    let h_s = tensor_product(&build_system_hamiltonian(couplings.j), &id_d);
    let h_d = tensor_product(&id_s, &build_detector_hamiltonian(&s.lasers));
    let hamiltonian = &(&h_s + &h_d) + &build_interaction_hamiltonian(&couplings);
    let jump = tensor_product(&id_s, &detector_jump_operator(s.lasers.gamma_p));
    Ok(EffectiveModel { hamiltonian, jump, couplings, lasers: s.lasers, layout })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialState {
    /// `|1⟩⟨1| ⊗ |g⟩⟨g|`
    State1,
    /// `|2⟩⟨2| ⊗ |g⟩⟨g|`
    State2,
}

pub fn initial_state(which: InitialState) -> DensityMatrix {
    let layout = HilbertLayout::DIMER_DETECTOR;
    let (k, label) = match which {
        InitialState::State1 => (layout.index(0, detector::G), "rho1"),
        InitialState::State2 => (layout.index(1, detector::G), "rho2"),
    };
    DensityMatrix::new_unchecked(ComplexMatrix::projector(layout.full_dim(), k)).with_label(label)
}

/// Normalized dark-state ket `∝ Ω_c|g⟩ − Ω_p|r⟩` of the resonant detector.
pub fn dark_state(lasers: &LaserParams) -> [C64; 3] {
    let norm = lasers.omega_p.hypot(lasers.omega_c);
    if norm == 0.0 {
        return [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
    }
    [C64::new(lasers.omega_c / norm, 0.0), C64::new(0.0, 0.0), C64::new(-lasers.omega_p / norm, 0.0)]
}
