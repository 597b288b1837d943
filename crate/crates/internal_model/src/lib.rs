//! Internal models for time-varying output regulation.
//!
//! An internal model is a marginally stable pair (F, H) that can replay
//! the ideal feedforward trajectory `R(t, μ) Φ_S(t, t0)` from a suitable
//! initial condition Σ(t0, μ) alone.  This crate constructs them:
//!
//! * [`nominal_im`] — the trivial immersion (F = S, H = R₀) for a single
//!   known parameter value;
//! * [`interaction_robust_im`] — exact finite-dimensional models when the
//!   uncertainty enters only the disturbance coupling rows (P, Q), built
//!   from one sub-problem per uncertainty channel;
//! * [`plant_approx_im`] — truncated series models when the uncertainty
//!   enters the plant matrices themselves (zero-dynamics block and
//!   high-frequency gain), with a computable error bound;
//! * [`reduce_im`] / [`shift_im`] — dimension reduction by observability
//!   screening plus initial-value-range projection, and generator
//!   exchange;
//! * [`canonical_realization`] — the stabilized triple (F_im, G_im, H_im)
//!   obtained through a Lyapunov transformation L(t), ready for the
//!   high-gain controller.
//!
//! [`verify_propagation`] closes the loop: it fits Σ(t0, μ) by least
//! squares and reports how well a candidate model actually reproduces a
//! family of feedforward trajectories.

mod approx;
mod build;
mod canonical;
mod model;
mod persist;
mod reduce;

pub use approx::{
    neumann_tail_bound, peano_baker_local_bound, plant_approx_im, truncation_bound,
    ApproxImOptions, ApproxIMReport,
};
pub use build::{interaction_robust_im, nominal_im, RobustImOptions};
pub use canonical::{canonical_realization, CanonicalOptions, CanonicalRealization};
pub use model::{
    verify_propagation, InternalModel, Monomial, MuFit, PropagationFit, Provenance, SigmaInit,
};
pub use reduce::{reduce_im, shift_im, ReduceOptions, ReduceReport};

use std::fmt;

#[derive(Debug, Clone)]
pub enum ImError {
    /// A channel touches a matrix the requested construction cannot
    /// absorb (e.g. plant-matrix uncertainty fed to the interaction
    /// construction).
    UnsupportedChannel { target: String },
    /// A per-channel regulator sub-problem failed.
    SubSolveFailed { channel: usize, reason: String },
    /// The plant is not in the chain-over-zero-dynamics shape the series
    /// construction requires.
    NotNormalForm { why: String },
    /// A truncation smallness condition fails; the uncertainty box must
    /// shrink by at least the reported factor before the bound is valid.
    SmallnessViolated { which: String, value: f64, limit: f64 },
    /// Projection would under-span the uncertainty.
    TooFewSamples { got: usize, need: usize },
    /// A tolerance argument is not positive.
    BadTolerance { value: f64 },
    /// Windowed observability margin below the usable floor.
    ObservabilityTooWeak { margin: f64 },
    /// The Lyapunov transformation lost invertibility.
    IllConditionedTransform { cond: f64, t: f64 },
    /// The requested replacement generator is not marginally stable.
    UnstableShiftTarget { sup: f64 },
}

impl fmt::Display for ImError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ImError::UnsupportedChannel { target } => {
                write!(f, "uncertainty channel on {target} is outside this construction's scope")
            }
            ImError::SubSolveFailed { channel, reason } => {
                write!(f, "regulator sub-problem for channel {channel} failed: {reason}")
            }
            ImError::NotNormalForm { why } => {
                write!(f, "plant is not in the required normal form: {why}")
            }
            ImError::SmallnessViolated { which, value, limit } => write!(
                f,
                "smallness condition violated: {which} = {value:.3e} must stay below {limit:.3e} \
                 (shrink the uncertainty box by at least {:.2}x)",
                value / limit
            ),
            ImError::TooFewSamples { got, need } => {
                write!(f, "{got} parameter samples cannot span the uncertainty; need at least {need}")
            }
            ImError::BadTolerance { value } => write!(f, "tolerance must be positive, got {value}"),
            ImError::ObservabilityTooWeak { margin } => write!(
                f,
                "windowed observability margin {margin:.3e} below 1e-12; \
                 the model is not uniformly completely observable at working precision"
            ),
            ImError::IllConditionedTransform { cond, t } => write!(
                f,
                "Lyapunov transformation condition number {cond:.3e} at t = {t:.3} exceeds 1e8"
            ),
            ImError::UnstableShiftTarget { sup } => write!(
                f,
                "replacement generator transition norm reaches {sup:.3e}; not marginally stable"
            ),
        }
    }
}

impl std::error::Error for ImError {}
