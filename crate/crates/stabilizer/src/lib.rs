//! High-gain error-feedback controllers around a canonical realization.
//!
//! Given a stabilized internal-model triple (F_im, G_im, H_im), the
//! controller couples a fast observer-like block for the first r error
//! derivatives with a replayed copy of the steady input:
//!
//! ```text
//! d/dt [ξ1; ξ2] = [ M_g,                0              ] [ξ1]   [L_g]
//!                 [ -k·sign(b)·G_im·(-K 1), F_im+G_im·H_im ] [ξ2] + [ 0 ] e
//!             u = [ -k·sign(b)·(-K 1),  H_im ] [ξ1; ξ2]
//! ```
//!
//! [`brunovsky_gain`] places the poles of the internal chain,
//! [`HighGainParams`] carries (k, g, d, K, sign b) with Hurwitz checks,
//! [`build_controller`] assembles the blocks, and [`autotune_gains`]
//! doubles the gains until an unforced closed loop passes a decay probe.

mod controller;
mod gains;
mod probe;

pub use controller::{build_controller, read_controller_csv, Controller};
pub use gains::{brunovsky_gain, gain_sign, HighGainParams};
pub use probe::{autotune_gains, decay_probe, ProbeOutcome, TuneStep, UasProbe};

use std::fmt;

#[derive(Debug, Clone)]
pub enum StabilizerError {
    /// A polynomial or closed-loop matrix that must be Hurwitz is not.
    NotHurwitz { what: &'static str, worst_real: f64 },
    /// Pole list length does not match the chain order.
    PoleCount { got: usize, need: usize },
    /// A requested pole is not strictly negative.
    BadPole { value: f64 },
    /// A gain parameter is outside its admissible range.
    BadGain { what: &'static str, value: f64 },
    /// Realization and parameter dimensions do not fit together.
    DimensionMismatch { what: String },
    /// The control gain b(t) vanishes or changes sign on the horizon.
    GainSignViolation { t: f64, value: f64 },
    /// The realization's readout reconstruction defect is too large to
    /// trust the composite generator.
    WeakRealization { defect: f64 },
    /// Gain doubling exhausted without passing the decay probe.
    TuneExhausted { best_exponent: f64, doublings: usize },
    /// A persisted controller file could not be parsed.
    MalformedCsv { line: usize, why: String },
}

impl fmt::Display for StabilizerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StabilizerError::NotHurwitz { what, worst_real } => {
                write!(f, "{what} is not Hurwitz (largest eigenvalue real part {worst_real:.3e})")
            }
            StabilizerError::PoleCount { got, need } => {
                write!(f, "expected {need} poles for the internal chain, got {got}")
            }
            StabilizerError::BadPole { value } => {
                write!(f, "pole {value} is not strictly negative")
            }
            StabilizerError::BadGain { what, value } => {
                write!(f, "gain {what} = {value} is outside its admissible range")
            }
            StabilizerError::DimensionMismatch { what } => write!(f, "dimension mismatch: {what}"),
            StabilizerError::GainSignViolation { t, value } => write!(
                f,
                "control gain b({t:.3}) = {value:.3e} vanishes or changes sign; \
                 a fixed feedback sign cannot be chosen"
            ),
            StabilizerError::WeakRealization { defect } => write!(
                f,
                "realization reconstruction defect {defect:.3e} too large to build on"
            ),
            StabilizerError::TuneExhausted { best_exponent, doublings } => write!(
                f,
                "gain tuning exhausted after {doublings} doublings; \
                 best decay exponent seen {best_exponent:.3e}"
            ),
            StabilizerError::MalformedCsv { line, why } => {
                write!(f, "controller CSV malformed at line {line}: {why}")
            }
        }
    }
}

impl std::error::Error for StabilizerError {}
