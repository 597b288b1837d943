//! Gain selection: Brunovsky pole placement, Hurwitz screening, and the
//! parameter bundle consumed by the controller assembly.

use ltv_core::MatrixSignal;
use nalgebra::DMatrix;

use crate::StabilizerError;

/// Largest eigenvalue real part of the companion matrix of the monic
/// polynomial `s^r + c[r-1] s^{r-1} + … + c[0]`.
fn companion_spectral_abscissa(c: &[f64]) -> f64 {
    let r = c.len();
    if r == 0 {
        // Degree zero: nothing to destabilize.
        return f64::NEG_INFINITY;
    }
    let mut m = DMatrix::zeros(r, r);
    for i in 0..r - 1 {
        m[(i, i + 1)] = 1.0;
    }
    for j in 0..r {
        m[(r - 1, j)] = -c[j];
    }
    m.complex_eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

/// Row gain K placing the poles of the Brunovsky pair of order r−1.
///
/// The pair is the integrator chain `(A_b, B_b)` with `A_b` the upper
/// shift and `B_b` the last unit column, so `A_b + B_b K` is a companion
/// matrix and coefficient matching gives K directly: for the target
/// polynomial `∏(s − p_i) = s^m + c_{m−1} s^{m−1} + … + c_0`, the gain is
/// `K = −[c_0, …, c_{m−1}]`.  For r = 1 the chain is empty and K is the
/// empty row.
pub fn brunovsky_gain(r: usize, poles: &[f64]) -> Result<DMatrix<f64>, StabilizerError> {
    assert!(r >= 1, "relative degree must be at least 1");
    let m = r - 1;
    if poles.len() != m {
        return Err(StabilizerError::PoleCount { got: poles.len(), need: m });
    }
    for &p in poles {
        if !(p < 0.0) {
            return Err(StabilizerError::BadPole { value: p });
        }
    }
    // Expand ∏(s − p_i); coeffs[i] multiplies s^i, monic of degree m.
    let mut coeffs = vec![0.0; m + 1];
    coeffs[0] = 1.0;
    let mut deg = 0;
    for &p in poles {
        for i in (0..=deg).rev() {
            coeffs[i + 1] += coeffs[i];
            coeffs[i] *= -p;
        }
        deg += 1;
    }
    let k = DMatrix::from_fn(1, m, |_, j| -coeffs[j]);
    Ok(k)
}

/// Read the feedback sign from the control gain's first entry, sampling
/// the horizon to confirm it neither vanishes nor changes sign.
pub fn gain_sign(b: &MatrixSignal, t0: f64, horizon: f64) -> Result<f64, StabilizerError> {
    const FLOOR: f64 = 1e-9;
    let samples = 513;
    let first = b.eval(t0)[(0, 0)];
    if first.abs() < FLOOR {
        return Err(StabilizerError::GainSignViolation { t: t0, value: first });
    }
    let sign = first.signum();
    for i in 1..samples {
        let t = t0 + horizon * i as f64 / (samples - 1) as f64;
        let v = b.eval(t)[(0, 0)];
        if v.abs() < FLOOR || v.signum() != sign {
            return Err(StabilizerError::GainSignViolation { t, value: v });
        }
    }
    Ok(sign)
}

/// The gain bundle of the high-gain controller: the feedback gain k, the
/// observer gain g, the Hurwitz coefficients d_0…d_{r−1} of the fast
/// block, the Brunovsky row K, and the sign of the control gain.
///
/// `k = 0` is accepted as a degenerate value that disconnects the
/// stabilizing path (useful as a negative control); every other k must
/// be positive.
#[derive(Clone, Debug)]
pub struct HighGainParams {
    pub k: f64,
    pub g: f64,
    /// Coefficients d_0 … d_{r−1} of `s^r + d_{r−1} s^{r−1} + … + d_0`.
    pub d: Vec<f64>,
    /// 1×(r−1) row gain for the internal chain.
    pub brunovsky: DMatrix<f64>,
    /// ±1, read off the plant's control gain.
    pub sign_b: f64,
}

impl HighGainParams {
    pub fn new(
        k: f64,
        g: f64,
        d: Vec<f64>,
        brunovsky: DMatrix<f64>,
        sign_b: f64,
    ) -> Result<Self, StabilizerError> {
        let params = HighGainParams { k, g, d, brunovsky, sign_b };
        params.validate()?;
        Ok(params)
    }

    /// Binomial d (the coefficients of (s+1)^r) and Brunovsky poles at
    /// −1, …, −(r−1): well-conditioned defaults that keep the fast block
    /// from peaking against the internal chain.
    pub fn standard(r: usize, k: f64, g: f64) -> Result<Self, StabilizerError> {
        assert!(r >= 1, "relative degree must be at least 1");
        let mut d = Vec::with_capacity(r);
        let mut binom = 1.0;
        for i in 0..r {
            // C(r, i) iteratively.
            d.push(binom);
            binom = binom * (r - i) as f64 / (i + 1) as f64;
        }
        let poles: Vec<f64> = (1..r).map(|i| -(i as f64)).collect();
        let brunovsky = brunovsky_gain(r, &poles)?;
        Self::new(k, g, d, brunovsky, 1.0)
    }

    /// Same structure with different gains (used by the tuner).
    pub fn with_gains(&self, k: f64, g: f64) -> Result<Self, StabilizerError> {
        Self::new(k, g, self.d.clone(), self.brunovsky.clone(), self.sign_b)
    }

    /// Relative degree this bundle is sized for.
    pub fn r(&self) -> usize {
        self.d.len()
    }

    pub fn validate(&self) -> Result<(), StabilizerError> {
        if !(self.k >= 0.0) {
            return Err(StabilizerError::BadGain { what: "k", value: self.k });
        }
        if !(self.g > 1.0) {
            return Err(StabilizerError::BadGain { what: "g", value: self.g });
        }
        if self.sign_b != 1.0 && self.sign_b != -1.0 {
            return Err(StabilizerError::BadGain { what: "sign_b", value: self.sign_b });
        }
        let r = self.d.len();
        if r == 0 {
            return Err(StabilizerError::DimensionMismatch { what: "empty d".into() });
        }
        if self.brunovsky.nrows() != 1 || self.brunovsky.ncols() != r - 1 {
            return Err(StabilizerError::DimensionMismatch {
                what: format!(
                    "Brunovsky row is {}x{}, need 1x{}",
                    self.brunovsky.nrows(),
                    self.brunovsky.ncols(),
                    r - 1
                ),
            });
        }
        let worst = companion_spectral_abscissa(&self.d);
        if worst >= 0.0 {
            return Err(StabilizerError::NotHurwitz { what: "fast-block polynomial d", worst_real: worst });
        }
        // A_b + B_b K is companion with last row K: its characteristic
        // polynomial is s^{r−1} − K_{r−1} s^{r−2} − … − K_1.
        let chain: Vec<f64> = (0..r - 1).map(|j| -self.brunovsky[(0, j)]).collect();
        let worst = companion_spectral_abscissa(&chain);
        if worst >= 0.0 {
            return Err(StabilizerError::NotHurwitz { what: "internal chain A_b + B_b K", worst_real: worst });
        }
        Ok(())
    }

    /// One-line JSON rendering of the bundle.
    pub fn manifest_json(&self) -> String {
        let d: Vec<String> = self.d.iter().map(|v| format!("{v}")).collect();
        let kk: Vec<String> =
            self.brunovsky.iter().map(|v| format!("{v}")).collect();
        format!(
            "{{\"k\":{},\"g\":{},\"sign_b\":{},\"d\":[{}],\"brunovsky\":[{}]}}",
            self.k,
            self.g,
            self.sign_b,
            d.join(","),
            kk.join(","),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn degenerate_orders_give_empty_and_scalar_gains() {
        let k = brunovsky_gain(1, &[]).unwrap();
        assert_eq!(k.ncols(), 0);
        let k = brunovsky_gain(2, &[-2.0]).unwrap();
        assert_eq!(k, dmatrix![-2.0]);
    }

    #[test]
    fn placement_matches_coefficients_and_eigenvalues() {
        let k = brunovsky_gain(3, &[-1.0, -2.0]).unwrap();
        assert_eq!(k, dmatrix![-2.0, -3.0]);

        // Independent check: eigenvalues of the placed chain.
        let a_cl = dmatrix![0.0, 1.0; k[(0,0)], k[(0,1)]];
        let mut eigs: Vec<f64> = a_cl.complex_eigenvalues().iter().map(|z| z.re).collect();
        eigs.sort_by(f64::total_cmp);
        assert!((eigs[0] + 2.0).abs() < 1e-12 && (eigs[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn bad_poles_are_refused() {
        assert!(matches!(brunovsky_gain(2, &[0.5]), Err(StabilizerError::BadPole { .. })));
        assert!(matches!(
            brunovsky_gain(3, &[-1.0]),
            Err(StabilizerError::PoleCount { got: 1, need: 2 })
        ));
    }

    #[test]
    fn parameter_invariants_are_enforced() {
        // Binomial defaults are Hurwitz at every order.
        for r in 1..=5 {
            HighGainParams::standard(r, 1.0, 2.0).unwrap();
        }
        // (s^2 − 1) is not Hurwitz.
        let bad = HighGainParams::new(1.0, 2.0, vec![-1.0, 0.0], dmatrix![-1.0], 1.0);
        assert!(matches!(bad, Err(StabilizerError::NotHurwitz { .. })));
        // Destabilizing Brunovsky row.
        let bad = HighGainParams::new(1.0, 2.0, vec![1.0, 2.0], dmatrix![2.0], 1.0);
        assert!(matches!(bad, Err(StabilizerError::NotHurwitz { .. })));
        // g must exceed 1, k must be non-negative, sign must be ±1.
        assert!(HighGainParams::standard(1, 1.0, 0.5).is_err());
        assert!(HighGainParams::new(-1.0, 2.0, vec![1.0], DMatrix::zeros(1, 0), 1.0).is_err());
        assert!(HighGainParams::new(1.0, 2.0, vec![1.0], DMatrix::zeros(1, 0), 0.0).is_err());
        // The degenerate k = 0 negative control is allowed.
        HighGainParams::new(0.0, 2.0, vec![1.0], DMatrix::zeros(1, 0), 1.0).unwrap();
    }

    #[test]
    fn sign_reading_guards_against_vanishing_gain() {
        let ok = MatrixSignal::opaque(1, 1, 2, |t| dmatrix![1.0 + 0.5 * t.sin()]);
        assert_eq!(gain_sign(&ok, 0.0, 50.0).unwrap(), 1.0);
        let negative = MatrixSignal::scalar(-0.3);
        assert_eq!(gain_sign(&negative, 0.0, 50.0).unwrap(), -1.0);

        let zero = MatrixSignal::zeros(1, 1);
        assert!(matches!(
            gain_sign(&zero, 0.0, 50.0),
            Err(StabilizerError::GainSignViolation { .. })
        ));
        let flips = MatrixSignal::opaque(1, 1, 2, |t| dmatrix![t.cos()]);
        assert!(matches!(
            gain_sign(&flips, 0.0, 50.0),
            Err(StabilizerError::GainSignViolation { .. })
        ));
    }
}
