//! Repeated output differentiation along a plant and relative degree.

use std::fmt;

use crate::signal::MatrixSignal;

/// One differentiation of an output functional along `ẋ = A(t) x`:
/// the row `c(t)x` has derivative `(ċ + c·A)(t) x`.
pub fn lie_step(c: &MatrixSignal, a: &MatrixSignal) -> MatrixSignal {
    c.deriv() + c * a
}

/// The chain `[c, Lc, L²c, …, Lᵏc]` (length `k+1`).
pub fn lie_output_chain(c: &MatrixSignal, a: &MatrixSignal, k: usize) -> Vec<MatrixSignal> {
    let mut out = Vec::with_capacity(k + 1);
    out.push(c.clone());
    for _ in 0..k {
        let next = lie_step(out.last().unwrap(), a);
        out.push(next);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChainError {
    /// A chain gain `(Lⁱc)B` changes magnitude across the zero threshold
    /// on the sampling grid, so no uniform relative degree exists there.
    GainCrossesZero { order: usize, min: f64, max: f64 },
    /// All gains up to the state dimension vanish on the grid.
    NoRelativeDegree { n: usize },
}

impl fmt::Display for ChainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChainError::GainCrossesZero { order, min, max } => write!(
                f,
                "gain crosses zero: |(L^{order} c)B| ranges {min:.3e}..{max:.3e} on the grid"
            ),
            ChainError::NoRelativeDegree { n } => {
                write!(f, "no relative degree up to the state dimension {n}")
            }
        }
    }
}

impl std::error::Error for ChainError {}

/// Uniform relative degree detected on a sampling grid, together with the
/// smallest high-gain coefficient magnitude observed there.
#[derive(Debug, Clone, Copy)]
pub struct RelativeDegree {
    pub r: usize,
    /// `min_grid |(L^{r-1} c) B|`.
    pub phi_b: f64,
}

/// Detect the uniform relative degree of `(A, B, c)` on `[t0, t1]` sampled
/// at `samples` points. A gain row counts as zero when its largest
/// magnitude stays at or below `tol`, and as nonzero when its smallest
/// magnitude stays above `tol`; anything in between is a crossing.
pub fn relative_degree(
    a: &MatrixSignal,
    b: &MatrixSignal,
    c: &MatrixSignal,
    t0: f64,
    t1: f64,
    samples: usize,
    tol: f64,
) -> Result<RelativeDegree, ChainError> {
    assert!(samples >= 2 && t1 > t0);
    let n = a.rows();
    let mut row = c.clone();
    for order in 0..n {
        let gain = &row * b;
        let mut min = f64::INFINITY;
        let mut max = 0.0_f64;
        let mut pos = false;
        let mut neg = false;
        for i in 0..samples {
            let t = t0 + (t1 - t0) * i as f64 / (samples - 1) as f64;
            let g = gain.eval_scalar(t);
            min = min.min(g.abs());
            max = max.max(g.abs());
            pos |= g > 0.0;
            neg |= g < 0.0;
        }
        if max <= tol {
            row = lie_step(&row, a);
            continue;
        }
        // A continuous gain that changes sign must pass through zero
        // between samples even when no sample lands on it.
        if min > tol && !(pos && neg) {
            return Ok(RelativeDegree { r: order + 1, phi_b: min });
        }
        return Err(ChainError::GainCrossesZero { order, min, max });
    }
    Err(ChainError::NoRelativeDegree { n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn double_integrator_has_relative_degree_two() {
        let a = MatrixSignal::constant(dmatrix![0.0, 1.0; 0.0, 0.0]);
        let b = MatrixSignal::constant(dmatrix![0.0; 1.0]);
        let c = MatrixSignal::constant(dmatrix![1.0, 0.0]);
        let rd = relative_degree(&a, &b, &c, 0.0, 10.0, 201, 1e-9).unwrap();
        assert_eq!(rd.r, 2);
        assert!((rd.phi_b - 1.0).abs() < 1e-12);
        // the chain itself: L c = [0, 1]
        let chain = lie_output_chain(&c, &a, 1);
        assert_eq!(chain[1].eval(3.0), dmatrix![0.0, 1.0]);
    }

    #[test]
    fn time_varying_chain_includes_signal_derivative() {
        // c(t) = [cos t, 0], A = 0: L c = ċ = [-sin t, 0]
        let a = MatrixSignal::zeros(2, 2);
        let c = MatrixSignal::block(vec![vec![
            MatrixSignal::sinusoid(1.0, 1.0, 0.0),
            MatrixSignal::zeros(1, 1),
        ]]);
        let l1 = lie_step(&c, &a);
        for i in 0..20 {
            let t = 0.3 * i as f64;
            assert!((l1.eval(t)[(0, 0)] + t.sin()).abs() < 1e-13);
        }
    }

    #[test]
    fn vanishing_gain_is_a_crossing() {
        // scalar plant with b(t) = cos t: |cb| crosses zero on [0, 2π]
        let a = MatrixSignal::zeros(1, 1);
        let b = MatrixSignal::sinusoid(1.0, 1.0, 0.0);
        let c = MatrixSignal::scalar(1.0);
        let err = relative_degree(&a, &b, &c, 0.0, 6.3, 401, 1e-9).unwrap_err();
        match err {
            ChainError::GainCrossesZero { order, .. } => assert_eq!(order, 0),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
