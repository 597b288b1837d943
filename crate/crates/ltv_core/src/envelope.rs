//! Measured exponential envelopes ‖Φ(t,s)‖ ≤ φ₁ e^{−φ₂ (t−s)}.

use crate::signal::MatrixSignal;
use crate::transition::transition_grid;

/// A fitted exponential envelope for a transition matrix.
#[derive(Clone, Copy, Debug)]
pub struct Envelope {
    pub phi1: f64,
    pub phi2: f64,
}

/// Fit `φ₁, φ₂` so that `‖Φ(t,s)‖ ≤ φ₁ e^{−φ₂(t−s)}` holds on 50 sampled
/// pairs over `[t0, t0+horizon]`.
///
/// The decay rate comes from a least-squares fit of `ln‖Φ‖` against the
/// elapsed time; the amplitude is then set to dominate every sample and
/// inflated by 10% for margin, so the returned envelope is a true bound on
/// the sampled pairs.
pub fn stability_envelope(a: &MatrixSignal, t0: f64, horizon: f64, step: f64) -> Envelope {
    assert!(horizon > 0.0 && step > 0.0);
    let n_anchor = 10;
    let n_span = 5; // 50 pairs total
    let grid = transition_grid(a, t0, t0 + horizon, step);
    let last = grid.len() - 1;

    let mut xs = Vec::with_capacity(n_anchor * n_span);
    let mut ys = Vec::with_capacity(n_anchor * n_span);
    for i in 0..n_anchor {
        let si = i * last / (2 * n_anchor); // anchors in the first half
        let phi_s = grid.node(si);
        let phi_s_inv = phi_s
            .clone()
            .try_inverse()
            .expect("transition matrix is invertible");
        for j in 1..=n_span {
            let ti = si + j * (last - si) / n_span;
            if ti <= si {
                continue;
            }
            // Φ(t, s) = Φ(t, t0) Φ(t0, s)
            let phi = grid.node(ti) * &phi_s_inv;
            let dt = (ti - si) as f64 * grid.step();
            let norm = spectral_norm(&phi);
            if norm > 0.0 {
                xs.push(dt);
                ys.push(norm.ln());
            }
        }
    }

    // Least squares: y ≈ ln φ₁ − φ₂ x.
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    let slope = if denom.abs() > 1e-12 {
        (n * sxy - sx * sy) / denom
    } else {
        0.0
    };
    let phi2 = (-slope).max(1e-6);

    // Amplitude: smallest φ₁ that dominates all samples, plus 10%.
    let mut phi1 = 0.0_f64;
    for (x, y) in xs.iter().zip(&ys) {
        phi1 = phi1.max((y + phi2 * x).exp());
    }
    Envelope {
        phi1: 1.1 * phi1.max(1.0),
        phi2,
    }
}

/// Largest singular value (the induced 2-norm).
pub fn spectral_norm(m: &nalgebra::DMatrix<f64>) -> f64 {
    m.singular_values().max()
}

/// Default settling window before steady-state quantities are read off:
/// ten decay time constants, and never less than ten seconds.
pub fn washout_time(phi2: f64) -> f64 {
    (10.0 / phi2).max(10.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn constant_decay_is_recovered() {
        let a = MatrixSignal::constant(dmatrix![-1.0, 0.0; 0.0, -1.0]);
        let env = stability_envelope(&a, 0.0, 20.0, 1e-3);
        assert!((env.phi2 - 1.0).abs() < 0.05, "phi2 = {}", env.phi2);
        assert!(env.phi1 >= 1.0 && env.phi1 < 1.3);
    }

    #[test]
    fn envelope_dominates_samples() {
        let a = MatrixSignal::constant(dmatrix![-0.5, 2.0; 0.0, -1.5]);
        let env = stability_envelope(&a, 0.0, 30.0, 1e-3);
        for k in 1..60 {
            let dt = 0.5 * k as f64;
            let phi = crate::transition::transition_matrix(&a, dt, 0.0, 1e-3);
            assert!(
                spectral_norm(&phi) <= env.phi1 * (-env.phi2 * dt).exp() * 1.05,
                "violated at dt={dt}"
            );
        }
    }

    #[test]
    fn washout_floors_at_ten_seconds() {
        assert_eq!(washout_time(2.0), 10.0);
        assert_eq!(washout_time(0.5), 20.0);
    }
}
