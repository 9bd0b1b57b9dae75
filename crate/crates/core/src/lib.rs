//! Numerical simulator for memory-assisted quantum telescope arrays.
//!
//! Stellar photons are modeled as weak thermal light over an array of sites,
//! encoded into binary qubit memories, decoded with nonlocal parity checks and
//! imaged either through a quantum Fourier transform or by sampling pairwise
//! visibilities. The [`transfer`] module covers photon-detection-based state
//! transfer into the memories.
//!
//! Families of interchangeable algorithms (encoding layouts, imaging
//! pipelines, transfer strategies) are registered by name in a
//! [`registry::Registry`] and selected at runtime.

pub mod codec;
pub mod error;
pub mod imaging;
pub mod netdecode;
pub mod qcore;
pub mod registry;
pub mod rng;
pub mod source;
pub mod transfer;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
