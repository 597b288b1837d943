//! Direct solver for the time-invariant regulator equation.
//!
//! When the zero dynamics and the exogenous generator are both constant,
//! the steady lower block satisfies a Sylvester equation
//! `η X − X S = −U`.  Vectorising column-by-column turns it into
//! `(I ⊗ η − Sᵀ ⊗ I) vec X = −vec U`, which is solvable exactly when the
//! spectra of η and S are disjoint.

use nalgebra::DMatrix;

use crate::RegulatorError;

/// Minimum separation between the spectra before the problem is treated
/// as resonant.
const SPECTRA_GAP: f64 = 1e-8;

/// Solve `η X − X S = −U` for constant matrices.
pub fn sylvester_lti_oracle(
    eta: &DMatrix<f64>,
    s: &DMatrix<f64>,
    u: &DMatrix<f64>,
) -> Result<DMatrix<f64>, RegulatorError> {
    let n = eta.nrows();
    let rho = s.nrows();
    assert_eq!(eta.ncols(), n, "eta must be square");
    assert_eq!(s.ncols(), rho, "s must be square");
    assert_eq!((u.nrows(), u.ncols()), (n, rho), "u must be n x rho");

    let ev_eta = eta.complex_eigenvalues();
    let ev_s = s.complex_eigenvalues();
    let mut gap = f64::INFINITY;
    for le in ev_eta.iter() {
        for ls in ev_s.iter() {
            gap = gap.min((le - ls).norm());
        }
    }
    if gap < SPECTRA_GAP {
        return Err(RegulatorError::ResonantPair { gap });
    }

    let lhs = DMatrix::identity(rho, rho).kronecker(eta) - s.transpose().kronecker(&DMatrix::identity(n, n));
    let rhs = DMatrix::from_column_slice(n * rho, 1, u.as_slice()).scale(-1.0);
    let x = lhs
        .full_piv_lu()
        .solve(&rhs)
        .ok_or(RegulatorError::ResonantPair { gap })?;
    Ok(DMatrix::from_column_slice(n, rho, x.as_slice()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_block_against_rotation() {
        let eta = DMatrix::from_row_slice(1, 1, &[-1.0]);
        let s = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let u = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let x = sylvester_lti_oracle(&eta, &s, &u).unwrap();
        assert!((x[(0, 0)] - 0.5).abs() < 1e-12);
        assert!((x[(0, 1)] + 0.5).abs() < 1e-12);
        // Residual of the defining equation.
        let res = &eta * &x - &x * &s + &u;
        assert!(res.norm() < 1e-12);
    }

    #[test]
    fn shared_spectrum_is_refused() {
        let rot = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let u = DMatrix::identity(2, 2);
        match sylvester_lti_oracle(&rot, &rot, &u) {
            Err(RegulatorError::ResonantPair { gap }) => assert!(gap < 1e-10),
            other => panic!("expected resonance refusal, got {other:?}"),
        }
    }
}
