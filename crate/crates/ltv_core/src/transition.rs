//! State transition matrices of `ẋ = A(t) x` by fixed-step RK4.

use nalgebra::DMatrix;

use crate::grid::Grid;
use crate::signal::MatrixSignal;

/// One RK4 step of the matrix ODE `Ẋ = A(t) X` from `(t, x)` with step `h`
/// (which may be negative for backward integration).
pub(crate) fn rk4_step(a: &MatrixSignal, t: f64, x: &DMatrix<f64>, h: f64) -> DMatrix<f64> {
    let k1 = a.eval(t) * x;
    let k2 = a.eval(t + 0.5 * h) * (x + 0.5 * h * &k1);
    let k3 = a.eval(t + 0.5 * h) * (x + 0.5 * h * &k2);
    let k4 = a.eval(t + h) * (x + h * &k3);
    x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Transition matrix `Φ(t, s)` of `ẋ = A(τ) x`, integrated with RK4 at the
/// given step. Works forward (`t ≥ s`) and backward (`t < s`); the step is
/// adjusted so the interval divides evenly.
pub fn transition_matrix(a: &MatrixSignal, t: f64, s: f64, step: f64) -> DMatrix<f64> {
    assert_eq!(a.rows(), a.cols(), "transition matrix needs a square A");
    assert!(step > 0.0, "step must be positive");
    let n = a.rows();
    let mut phi = DMatrix::identity(n, n);
    if (t - s).abs() < f64::EPSILON {
        return phi;
    }
    let span = t - s;
    let nsteps = (span.abs() / step).round().max(1.0) as usize;
    let h = span / nsteps as f64;
    let mut tau = s;
    for _ in 0..nsteps {
        phi = rk4_step(a, tau, &phi, h);
        tau += h;
    }
    phi
}

/// `Φ(t, t0)` stored on the uniform grid `t0 + i*step`, co-integrated in a
/// single forward pass.
pub fn transition_grid(a: &MatrixSignal, t0: f64, t1: f64, step: f64) -> Grid {
    assert_eq!(a.rows(), a.cols(), "transition matrix needs a square A");
    assert!(t1 > t0 && step > 0.0);
    let n = a.rows();
    let len = ((t1 - t0) / step).round() as usize + 1;
    let mut values = Vec::with_capacity(len);
    let mut phi = DMatrix::identity(n, n);
    values.push(phi.clone());
    for i in 0..len - 1 {
        let t = t0 + step * i as f64;
        phi = rk4_step(a, t, &phi, step);
        values.push(phi.clone());
    }
    Grid::new(t0, step, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn constant_system_matches_matrix_exponential() {
        // A = -I: Φ(2, 0) = e^{-2} I
        let a = MatrixSignal::constant(dmatrix![-1.0, 0.0; 0.0, -1.0]);
        let phi = transition_matrix(&a, 2.0, 0.0, 1e-3);
        let e = (-2.0_f64).exp();
        assert!((phi[(0, 0)] - e).abs() < 1e-8);
        assert!((phi[(1, 1)] - e).abs() < 1e-8);
        assert!(phi[(0, 1)].abs() < 1e-12);
    }

    #[test]
    fn backward_integration_inverts_forward() {
        let a = MatrixSignal::constant(dmatrix![0.0, 1.0; -1.6, 0.0])
            + MatrixSignal::sinusoid(0.2, 2.0, 0.0) * MatrixSignal::identity(2);
        let fwd = transition_matrix(&a, 3.0, 0.0, 1e-3);
        let bwd = transition_matrix(&a, 0.0, 3.0, 1e-3);
        let prod = &fwd * &bwd;
        assert!((prod - DMatrix::identity(2, 2)).norm() < 1e-9);
    }

    #[test]
    fn cocycle_identity() {
        // Φ(t2, t0) = Φ(t2, t1) Φ(t1, t0) to 1e-7
        let w2 = MatrixSignal::scalar(1.6)
            + MatrixSignal::sinusoid(0.2, 2.0, 0.0)
            + MatrixSignal::sinusoid(0.2, 2.0_f64.sqrt(), 0.0);
        let s = MatrixSignal::block(vec![
            vec![MatrixSignal::zeros(1, 1), MatrixSignal::scalar(1.0)],
            vec![-w2, MatrixSignal::zeros(1, 1)],
        ]);
        let full = transition_matrix(&s, 7.0, 0.0, 1e-3);
        let a = transition_matrix(&s, 7.0, 2.5, 1e-3);
        let b = transition_matrix(&s, 2.5, 0.0, 1e-3);
        assert!((full - a * b).norm() < 1e-7);
    }

    #[test]
    fn grid_agrees_with_pointwise_integration() {
        let a = MatrixSignal::constant(dmatrix![0.0, 1.0; -1.0, -0.5]);
        let g = transition_grid(&a, 0.0, 2.0, 1e-3);
        let direct = transition_matrix(&a, 1.0, 0.0, 1e-3);
        assert!((g.eval(1.0) - direct).norm() < 1e-12);
    }
}
