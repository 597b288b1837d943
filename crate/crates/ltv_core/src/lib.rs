//! Core building blocks for linear time-varying (LTV) control computations.
//!
//! The central abstraction is [`MatrixSignal`], a matrix-valued function of
//! time that knows how to differentiate itself exactly when built from
//! closed-form pieces (constants, sinusoids, sums, products, blocks, ...)
//! and falls back to central finite differences for opaque callables.
//!
//! On top of signals the crate provides:
//!
//! - [`transition_matrix`] / [`transition_grid`]: fixed-step RK4 state
//!   transition matrices, forward or backward in time;
//! - [`lie_output_chain`] / [`relative_degree`]: repeated output
//!   differentiation along a plant and detection of the input channel;
//! - [`RegStack`]: the stacked chain data (observability-style stacks for
//!   the state, exogenous, and disturbance channels) used by regulator
//!   equation solvers;
//! - [`stability_envelope`]: measured exponential envelopes of a
//!   transition matrix;
//! - [`instances`]: seeded random test systems in normal form.

pub mod chain;
pub mod envelope;
pub mod grid;
pub mod instances;
pub mod signal;
pub mod stack;
pub mod system;
pub mod transition;

pub use chain::{lie_output_chain, lie_step, relative_degree, ChainError};
pub use envelope::{stability_envelope, washout_time, Envelope};
pub use grid::Grid;
pub use signal::MatrixSignal;
pub use stack::{assemble_stack, RegStack};
pub use system::{Exosystem, PlantInstance, UncertainMatrix, UncertainPlant};
pub use transition::{transition_grid, transition_matrix};
