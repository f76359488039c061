//! Rydberg dimer coupled to a laser-driven three-level detector atom.
//!
//! The crate builds the dimer ⊗ detector Lindblad model from geometry and
//! laser settings, propagates it, and quantifies how much the reduced dimer
//! dynamics departs from Markovian behaviour through the growth of the
//! trace distance between two evolving dimer states.
//!
//! ```no_run
//! use rydnm::scenario::{preset, run_scenario, PresetId};
//!
//! let out = run_scenario(&preset(PresetId::Fig3)).unwrap();
//! println!("N = {:.3}", out.nm.n);
//! ```

pub mod dynamics;
pub mod measures;
pub mod model;
pub mod quantum;
pub mod scenario;

pub use num_complex::Complex64 as C64;
