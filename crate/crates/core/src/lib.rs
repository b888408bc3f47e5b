//! Classical simulation and analysis of optimal universal symmetric quantum
//! telecloning (1 → M approximate cloning driven by teleportation).
//!
//! The crate provides:
//!
//! * a dense pure/mixed-state simulator with mid-circuit measurement,
//!   classically conditioned gates, depolarizing noise, and readout
//!   confusion ([`state`], [`exec`], [`noise`]);
//! * constructors for the telecloning circuit families — 2 and 3 clones with
//!   or without ancilla, and the general ancilla-assisted 1 → M circuit —
//!   under feed-forward, deferred, and post-selected teleportation, plus
//!   closed-form CNOT cost accounting ([`telecloning`]);
//! * single-qubit tomography with maximum-likelihood reconstruction and
//!   measurement-error mitigation ([`tomography`], [`mitigation`]);
//! * an experiment harness sweeping Bloch-sphere grids of message states and
//!   emitting deterministic CSV/JSON results ([`harness`]);
//! * text export/import of circuits ([`export`]).
//!
//! Conventions: qubit 0 is the least significant bit; rendered bitstrings
//! put qubit 0 leftmost. All numerical kernels are generic over the scalar
//! type via [`Real`]; the aliases below pin the usual `f64` and `f32`
//! instantiations.

pub mod circuit;
pub mod error;
pub mod exec;
pub mod export;
pub mod gate;
pub mod harness;
pub mod mitigation;
pub mod noise;
pub mod real;
pub mod rng;
pub mod state;
pub mod telecloning;
pub mod tomography;

pub use real::{as_f64, real, Real};

/// Double-precision aliases (the defaults used by the harness and CLI).
pub type PureState64 = state::PureState<f64>;
pub type MixedState64 = state::MixedState<f64>;
pub type Circuit64 = circuit::Circuit<f64>;
pub type GateOp64 = gate::GateOp<f64>;
pub type MessageSpec64 = telecloning::MessageSpec<f64>;

/// Single-precision aliases.
pub type PureState32 = state::PureState<f32>;
pub type MixedState32 = state::MixedState<f32>;
pub type Circuit32 = circuit::Circuit<f32>;
pub type GateOp32 = gate::GateOp<f32>;
pub type MessageSpec32 = telecloning::MessageSpec<f32>;
