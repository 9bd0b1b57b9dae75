//! Composite Hilbert-space engine shared by every other module.
//!
//! A [`QuantumState`] lives on an ordered [`ModeRegistry`] of qubit and
//! truncated-Fock modes. Basis index ordering is big-endian: the first mode
//! of the registry is the most significant digit. States are immutable
//! values; every operation returns a new state.

mod kernel;
mod measure;
mod modes;
mod ops;
mod optics;
mod state;

pub use measure::{measure, measure_all, measure_forced, Basis, MeasurementBranch};
pub use modes::{Mode, ModeKind, ModeRegistry};
pub use ops::{gates, qft_matrix, qft_unitary, UnitaryOp};
pub use optics::{
    beam_splitter, coherent_amplitudes, coherent_state, linear_optics, linear_optics_matrix,
    lossy_detector, min_coherent_cutoff, transmission_beam_splitter, BS_LEAKAGE_THRESHOLD,
};
pub use state::{build_state, fidelity, partial_trace, QuantumState};
pub(crate) use optics::poisson_amplitudes;

use crate::C64;
use nalgebra::{DMatrix, DVector};

/// Largest total dimension held as a dense density matrix.
pub const DENSE_LIMIT: usize = 4096;

/// Structural tolerance (unitarity, hermiticity).
pub const STRUCT_TOL: f64 = 1e-12;

/// Accumulated-pipeline tolerance (trace, positivity).
pub const PIPELINE_TOL: f64 = 1e-10;

pub type CVector = DVector<C64>;
pub type CMatrix = DMatrix<C64>;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
