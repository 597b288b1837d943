//! Closed-loop assembly, integration, and measurement.
//!
//! The pieces built elsewhere — an exosystem `ẇ = S(t)w`, a plant
//! instance `ẋ = A(t)x + B(t)u + P(t)w` with error `e = C(t)x + Q(t)w`,
//! and a dynamic error-feedback controller `ξ̇ = F_c ξ + G_c e`,
//! `u = H_c ξ` — combine into one autonomous linear system
//!
//! ```text
//! d  ⎡w⎤   ⎡ S      0      0  ⎤ ⎡w⎤
//! ―  ⎢x⎥ = ⎢ P      A    B·H_c⎥ ⎢x⎥
//! dt ⎣ξ⎦   ⎣G_c·Q  G_c·C  F_c ⎦ ⎣ξ⎦
//! ```
//!
//! This crate assembles that system, integrates it with a fixed-step
//! RK4 scheme, and reduces the resulting traces to the numbers the rest
//! of the toolkit reasons about: the sup of `|e|` over the trailing
//! window, fitted decay exponents, random-initial-state stability
//! probes, and the Gram-matrix rank probe that detects output families
//! too rich for any small generator to reproduce.

mod assemble;
mod gram;
mod metrics;
mod probe;
mod trace;

pub use assemble::{assemble_closed_loop, ClosedLoopSystem};
pub use gram::{gram_dimension_probe, GramStep};
pub use metrics::{metrics, Metrics};
pub use probe::{uas_probe, DecayReport};
pub use trace::{simulate, SimulationTrace};

use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum SimError {
    /// Two pieces that must share a dimension do not; `what` names them.
    DimensionMismatch { what: String },
    /// Nonpositive or non-finite step / horizon.
    BadTimeGrid { what: &'static str, value: f64 },
    /// The integrated state norm crossed the divergence guard.
    Diverged { t: f64, norm: f64 },
    /// The Gram probe needs at least two family members.
    FamilyTooSmall { len: usize },
    /// Family members sampled on different grids cannot share quadrature.
    GridMismatch { what: String },
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::DimensionMismatch { what } => {
                write!(f, "dimension mismatch: {what}")
            }
            SimError::BadTimeGrid { what, value } => {
                write!(f, "{what} must be positive and finite, got {value}")
            }
            SimError::Diverged { t, norm } => {
                write!(
                    f,
                    "state norm reached {norm:.3e} at t = {t:.6}; \
                     the closed loop is diverging"
                )
            }
            SimError::FamilyTooSmall { len } => {
                write!(f, "need at least 2 family members, got {len}")
            }
            SimError::GridMismatch { what } => {
                write!(f, "family grids are misaligned: {what}")
            }
        }
    }
}

impl std::error::Error for SimError {}
