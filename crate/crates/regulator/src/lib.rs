//! Solvers for the time-varying regulator (Francis) equations
//!
//! ```text
//! Π̇(t) + Π(t)S(t) = A(t)Π(t) + B(t)R(t) + P(t)
//!            0     = C(t)Π(t) + Q(t)
//! ```
//!
//! Two integration routes are provided and agree wherever both apply:
//!
//! - a **normal-form** fast path for plants whose state is already split
//!   into an output-differentiation chain and zero dynamics: the chain
//!   rows of Π follow algebraically from the stacks, and only the
//!   zero-dynamics block is integrated;
//! - a coordinate-free **sweep** that integrates `Ψ̇ = MΨ + NΦ_S` with the
//!   input direction removed, then recovers `Π = Ψ Φ_S(t0, t)`.
//!
//! Steady-state quantities are read off after a washout interval chosen
//! from the measured decay of the stable part; the reported residuals
//! check both regulator equations on the post-washout grid.

mod solve;
mod sylvester;

pub use solve::{
    residuals, solve_initial_value, solve_regulator, InitRule, RegulatorSolution, SolveMethod,
    SolveOptions,
};
pub use sylvester::sylvester_lti_oracle;

use std::fmt;

#[derive(Debug, Clone)]
pub enum RegulatorError {
    /// The swept solution grows past any steady-state scale; the plant is
    /// not minimum-phase over the horizon or the data are inconsistent.
    UnboundedSolutionCandidate { t: f64, norm: f64 },
    /// The algebraic regulator equation is violated beyond tolerance
    /// after washout.
    AlgebraicResidual { residual: f64, tol: f64 },
    /// The LTI Sylvester operator is singular: an eigenvalue of the
    /// zero-dynamics block collides with one of the exosystem.
    ResonantPair { gap: f64 },
    /// The chain equations at the initial time admit no solution.
    InconsistentInitialValue { defect: f64 },
}

impl fmt::Display for RegulatorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegulatorError::UnboundedSolutionCandidate { t, norm } => {
                write!(f, "unbounded solution candidate: |Pi({t:.3})| = {norm:.3e}")
            }
            RegulatorError::AlgebraicResidual { residual, tol } => write!(
                f,
                "algebraic regulator equation residual {residual:.3e} exceeds {tol:.1e}"
            ),
            RegulatorError::ResonantPair { gap } => write!(
                f,
                "resonant pair: zero-dynamics and exosystem spectra within {gap:.3e}"
            ),
            RegulatorError::InconsistentInitialValue { defect } => write!(
                f,
                "chain equations at t0 are inconsistent (defect {defect:.3e})"
            ),
        }
    }
}

impl std::error::Error for RegulatorError {}
