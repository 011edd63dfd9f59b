//! Deterministic complex-amplitude simulator for interaction-free "chained
//! Zeno" interferometer gates: the two-module counterfactual CNOT and the
//! two-round qubit-transport protocol built on it, together with the matching
//! closed-form efficiency/fidelity expressions, parameter sweeps and a
//! self-check suite.
//!
//! The crate is split by layer:
//!
//! * [`amplitudes`] — joint Bob⊗photon states and elementary operations;
//! * [`zeno`] — the cycle engines (plain splitter chain, chained inner/outer
//!   cycles, and the polarization-encoded module);
//! * [`cnot`] — the two-module gate with its recombining splitter and path
//!   measurement;
//! * [`transport`] — the two-round transport protocol and exact gate-matrix
//!   circuit oracles;
//! * [`analysis`] — closed-form quantities (efficiency product, attenuation
//!   recursion, transfer-fidelity bracket);
//! * [`sweep`] — (M, N) grid evaluation with optional step simulation and CSV
//!   output (data-parallel when the `parallel` feature is on);
//! * [`verify`] — a named invariant/checkpoint suite for the CLI.

pub mod amplitudes;
pub mod cnot;
pub mod transport;
pub mod analysis;
mod error;
pub mod sweep;
pub mod verify;
pub mod zeno;

pub use amplitudes::{
    BobBasis, Gate, JointState, Outcome, PathMode, PhotonMode, Polarization, QubitAmplitudes,
};
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use zeno::CycleConfig;

/// Tolerance for identities that hold up to a few roundings.
pub const TOL_EXACT: f64 = 1e-12;

/// Tolerance for quantities accumulated over long runs (up to ~10⁵ rotation
/// steps).
pub const TOL_ACCUM: f64 = 1e-9;
