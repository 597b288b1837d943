//! Ready-made systems: the two worked examples shipped with the toolkit
//! and seeded random generators for property suites.

use nalgebra::DMatrix;
use rand::Rng;

use crate::signal::MatrixSignal;
use crate::system::{Exosystem, PlantInstance, UncertainMatrix, UncertainPlant};

/// Harmonic exosystem with a slowly breathing frequency:
/// `S(t) = [[0, 1], [-ω²(t), 0]]`, `ω²(t) = 1.6 + 0.2 (cos 2t + cos √2 t)`.
pub fn harmonic_exosystem() -> Exosystem {
    let w2 = MatrixSignal::scalar(1.6)
        + MatrixSignal::sinusoid(0.2, 2.0, 0.0)
        + MatrixSignal::sinusoid(0.2, 2.0_f64.sqrt(), 0.0);
    Exosystem::new(MatrixSignal::block(vec![
        vec![MatrixSignal::zeros(1, 1), MatrixSignal::scalar(1.0)],
        vec![-w2, MatrixSignal::zeros(1, 1)],
    ]))
}

fn nominal_chain_plant() -> (MatrixSignal, MatrixSignal, MatrixSignal) {
    let a0 = MatrixSignal::constant(DMatrix::from_row_slice(2, 2, &[1.0, -2.6, 1.0, -1.0]));
    let b = MatrixSignal::constant(DMatrix::from_row_slice(2, 1, &[1.0, 0.0]));
    let c = MatrixSignal::constant(DMatrix::from_row_slice(1, 2, &[1.0, 0.0]));
    (a0, b, c)
}

/// Worked example "interaction": a normal-form plant whose disturbance
/// coupling row carries one uncertain interaction parameter (index 0),
/// driven by the harmonic exosystem.
pub fn interaction_example() -> (UncertainPlant, Exosystem) {
    let (a0, b, c) = nominal_chain_plant();
    let q0 = MatrixSignal::constant(DMatrix::from_row_slice(1, 2, &[-1.0, -1.0]));
    let e_q = MatrixSignal::constant(DMatrix::from_row_slice(1, 2, &[-1.0, 0.0]));
    let plant = UncertainPlant::new(
        UncertainMatrix::known(a0),
        UncertainMatrix::known(b),
        UncertainMatrix::known(c),
        UncertainMatrix::known(MatrixSignal::zeros(2, 2)),
        UncertainMatrix::new(q0, vec![(0, e_q)]),
        1,
    );
    (plant, harmonic_exosystem())
}

/// Worked example "plant": the same nominal normal-form plant, but with
/// two coupled uncertainty channels inside the state matrix (index 0 on
/// the diagonal, index 1 on the upper-right entry). Callers that model a
/// single physical parameter ε = 1 + μ₀ set μ₁ = 2μ₀ + μ₀².
pub fn plant_example() -> (UncertainPlant, Exosystem) {
    let (a0, b, c) = nominal_chain_plant();
    let e_a1 = MatrixSignal::constant(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]));
    let e_a2 = MatrixSignal::constant(DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 0.0, 0.0]));
    let q0 = MatrixSignal::constant(DMatrix::from_row_slice(1, 2, &[-1.0, -1.0]));
    let plant = UncertainPlant::new(
        UncertainMatrix::new(a0, vec![(0, e_a1), (1, e_a2)]),
        UncertainMatrix::known(b),
        UncertainMatrix::known(c),
        UncertainMatrix::known(MatrixSignal::zeros(2, 2)),
        UncertainMatrix::known(q0),
        2,
    );
    (plant, harmonic_exosystem())
}

/// Scalar tracking family: `ẋ = u`, `e = (sin t + 2 + μ) x + w`, `ẇ = 0`.
/// Its steady feedforward is `R(t) = cos t / (sin t + 2 + μ)²`, a family
/// whose effective dimension grows slowly with the number of μ samples.
pub fn scalar_tracking_example(mu: f64) -> (PlantInstance, Exosystem) {
    let c = MatrixSignal::sin(&MatrixSignal::time()) + MatrixSignal::scalar(2.0 + mu);
    let plant = PlantInstance::new(
        MatrixSignal::zeros(1, 1),
        MatrixSignal::scalar(1.0),
        c,
        MatrixSignal::zeros(1, 1),
        MatrixSignal::scalar(1.0),
    );
    (plant, Exosystem::new(MatrixSignal::zeros(1, 1)))
}

/// Random constant skew-symmetric exosystem of dimension `rho` (1..=3);
/// skew generators have purely imaginary spectra, so trajectories stay on
/// spheres and the generator is marginally stable by construction.
pub fn random_exosystem<R: Rng>(rng: &mut R, rho: usize) -> Exosystem {
    assert!((1..=3).contains(&rho));
    let mut s = DMatrix::zeros(rho, rho);
    for i in 0..rho {
        for j in (i + 1)..rho {
            let w: f64 = rng.random_range(0.4..1.8);
            s[(i, j)] = w;
            s[(j, i)] = -w;
        }
    }
    Exosystem::new(MatrixSignal::constant(s))
}

fn random_row<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    DMatrix::from_fn(1, n, |_, _| rng.random_range(lo..hi))
}

/// Random LTI plant in normal form with relative degree `r`, `n` states
/// (`n > r`), and a Hurwitz triangular zero-dynamics block, paired with a
/// random exosystem of dimension `rho`.
pub fn random_lti_plant<R: Rng>(
    rng: &mut R,
    n: usize,
    r: usize,
    rho: usize,
) -> (PlantInstance, Exosystem) {
    assert!(r >= 1 && n > r);
    let nl = n - r;
    let mut a = DMatrix::zeros(n, n);
    for i in 0..r - 1 {
        a[(i, i + 1)] = 1.0;
    }
    for j in 0..n {
        a[(r - 1, j)] = rng.random_range(-1.0..1.0);
    }
    // Zero dynamics: triangular with negative diagonal, driven by the
    // first chain coordinate.
    for i in 0..nl {
        a[(r + i, 0)] = rng.random_range(-1.0..1.0);
        a[(r + i, r + i)] = -rng.random_range(0.5..2.0);
        for j in 0..i {
            a[(r + i, r + j)] = rng.random_range(-0.5..0.5);
        }
    }
    let mut b = DMatrix::zeros(n, 1);
    b[(r - 1, 0)] = rng.random_range(0.5..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let mut c = DMatrix::zeros(1, n);
    c[(0, 0)] = 1.0;
    let p = DMatrix::from_fn(n, rho, |_, _| rng.random_range(-1.0..1.0));
    let q = random_row(rng, rho, -1.0, 1.0);
    let plant = PlantInstance::new(
        MatrixSignal::constant(a),
        MatrixSignal::constant(b),
        MatrixSignal::constant(c),
        MatrixSignal::constant(p),
        MatrixSignal::constant(q),
    );
    (plant, random_exosystem(rng, rho))
}

/// Random time-varying plant in normal form. The zero-dynamics block is
/// `−d·I` plus a sinusoidally modulated skew part, so its symmetric part
/// stays at `−d` and the block is uniformly exponentially stable with a
/// known margin; the high-gain coefficient is bounded away from zero.
pub fn random_ltv_plant<R: Rng>(
    rng: &mut R,
    n: usize,
    r: usize,
    rho: usize,
) -> (PlantInstance, Exosystem) {
    assert!(r >= 1 && n > r);
    let nl = n - r;
    let d: f64 = rng.random_range(0.6..1.5);
    let wmod: f64 = rng.random_range(0.5..2.0);

    let sin_row = |rng: &mut R, len: usize| {
        let cells: Vec<MatrixSignal> = (0..len)
            .map(|_| {
                MatrixSignal::scalar(rng.random_range(-1.0..1.0))
                    + MatrixSignal::sinusoid(
                        rng.random_range(-0.5..0.5),
                        rng.random_range(0.5..2.0),
                        rng.random_range(0.0..1.0),
                    )
            })
            .collect();
        MatrixSignal::block(vec![cells])
    };

    let mut rows: Vec<Vec<MatrixSignal>> = Vec::with_capacity(n);
    for i in 0..r - 1 {
        let mut row = vec![MatrixSignal::zeros(1, 1); n];
        row[i + 1] = MatrixSignal::scalar(1.0);
        rows.push(row);
    }
    rows.push(vec![sin_row(rng, n)]);

    // Lower block: [β(t) | 0 | −d·I + skew(t)] assembled row by row.
    let mut skew = DMatrix::zeros(nl, nl);
    for i in 0..nl {
        for j in (i + 1)..nl {
            let w: f64 = rng.random_range(-0.8..0.8);
            skew[(i, j)] = w;
            skew[(j, i)] = -w;
        }
    }
    for i in 0..nl {
        let mut row = Vec::with_capacity(2 + nl);
        row.push(
            MatrixSignal::scalar(rng.random_range(-1.0..1.0))
                + MatrixSignal::sinusoid(rng.random_range(-0.3..0.3), wmod, 0.0),
        );
        if r > 1 {
            row.push(MatrixSignal::zeros(1, r - 1));
        }
        let mut eta_cells = Vec::with_capacity(nl);
        for j in 0..nl {
            let diag = if i == j { -d } else { 0.0 };
            eta_cells.push(
                MatrixSignal::scalar(diag)
                    + MatrixSignal::sinusoid(skew[(i, j)], wmod, 0.3),
            );
        }
        row.push(MatrixSignal::block(vec![eta_cells]));
        rows.push(row);
    }
    let a = normalize_block_rows(rows, n);

    let b_amp: f64 = rng.random_range(0.8..1.5) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let b_scalar = MatrixSignal::scalar(b_amp)
        + MatrixSignal::sinusoid(0.3 * b_amp, rng.random_range(0.5..2.0), 0.0);
    let mut b_cells = vec![MatrixSignal::zeros(1, 1); n];
    b_cells[r - 1] = b_scalar;
    let b = MatrixSignal::block(b_cells.into_iter().map(|c| vec![c]).collect());

    let mut c = DMatrix::zeros(1, n);
    c[(0, 0)] = 1.0;

    let p_rows: Vec<Vec<MatrixSignal>> = (0..n).map(|_| vec![sin_row(rng, rho)]).collect();
    let p = MatrixSignal::block(p_rows);
    let q = sin_row(rng, rho);

    let plant = PlantInstance::new(
        a,
        b,
        MatrixSignal::constant(c),
        p,
        q,
    );
    (plant, random_exosystem(rng, rho))
}

/// Small uncertain plant in normal form (n = 2, r = 1) with one channel on
/// the zero-dynamics pole (index 0) and one on the input coefficient
/// (index 1); used to exercise truncation-order error bounds.
pub fn random_uncertain_scalar_plant<R: Rng>(rng: &mut R) -> (UncertainPlant, Exosystem) {
    let alpha1: f64 = rng.random_range(-1.0..1.0);
    let alpha2: f64 = rng.random_range(-1.0..1.0);
    let beta: f64 = rng.random_range(0.5..1.5);
    let eta0: f64 = -rng.random_range(0.8..1.4);
    let b0: f64 = rng.random_range(0.8..1.4);
    let e_eta: f64 = rng.random_range(0.2..0.5);
    let e_b: f64 = rng.random_range(0.2..0.5);

    let a0 = DMatrix::from_row_slice(2, 2, &[alpha1, alpha2, beta, eta0]);
    let e_a = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, e_eta]);
    let q = random_row(rng, 2, -1.0, 1.0);
    let p = DMatrix::from_fn(2, 2, |_, _| rng.random_range(-0.5..0.5));

    let plant = UncertainPlant::new(
        UncertainMatrix::new(
            MatrixSignal::constant(a0),
            vec![(0, MatrixSignal::constant(e_a))],
        ),
        UncertainMatrix::new(
            MatrixSignal::constant(DMatrix::from_row_slice(2, 1, &[b0, 0.0])),
            vec![(1, MatrixSignal::constant(DMatrix::from_row_slice(2, 1, &[e_b, 0.0])))],
        ),
        UncertainMatrix::known(MatrixSignal::constant(DMatrix::from_row_slice(
            1,
            2,
            &[1.0, 0.0],
        ))),
        UncertainMatrix::known(MatrixSignal::constant(p)),
        UncertainMatrix::known(MatrixSignal::constant(q)),
        2,
    );
    (plant, random_exosystem(rng, 2))
}

/// Stitch per-row cell lists (which may mix widths) into an n×n signal.
fn normalize_block_rows(rows: Vec<Vec<MatrixSignal>>, n: usize) -> MatrixSignal {
    let rows: Vec<Vec<MatrixSignal>> = rows
        .into_iter()
        .map(|cells| {
            let width: usize = cells.iter().map(|c| c.cols()).sum();
            assert_eq!(width, n, "row width mismatch in block assembly");
            vec![MatrixSignal::block(vec![cells])]
        })
        .collect();
    MatrixSignal::block(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::relative_degree;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn worked_examples_share_the_nominal_plant() {
        let (iu, _) = interaction_example();
        let (pu, _) = plant_example();
        assert_eq!(
            iu.nominal().a.eval(0.0),
            pu.nominal().a.eval(0.0)
        );
        let rd = relative_degree(
            &iu.nominal().a,
            &iu.nominal().b,
            &iu.nominal().c,
            0.0,
            10.0,
            101,
            1e-9,
        )
        .unwrap();
        assert_eq!(rd.r, 1);
    }

    #[test]
    fn plant_channels_reproduce_the_physical_parametrization() {
        // ε = 1 + μ₀ with μ₁ = 2μ₀ + μ₀² gives A = [[ε, −1.6−ε²],[1, −ε]].
        let (pu, _) = plant_example();
        let mu0 = -0.25_f64;
        let mu1 = 2.0 * mu0 + mu0 * mu0;
        let a = pu.at(&[mu0, mu1]).a.eval(0.0);
        let eps = 1.0 + mu0;
        assert!((a[(0, 0)] - eps).abs() < 1e-14);
        assert!((a[(0, 1)] - (-1.6 - eps * eps)).abs() < 1e-14);
        assert!((a[(1, 0)] - 1.0).abs() < 1e-14);
        assert!((a[(1, 1)] + eps).abs() < 1e-14);
    }

    #[test]
    fn random_plants_have_the_declared_relative_degree() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (n, r, rho) in [(2, 1, 2), (3, 2, 2), (4, 2, 3), (3, 1, 1)] {
            let (plant, exo) = random_ltv_plant(&mut rng, n, r, rho);
            assert_eq!(exo.dim(), rho);
            let rd = relative_degree(&plant.a, &plant.b, &plant.c, 0.0, 20.0, 401, 1e-7)
                .unwrap_or_else(|e| panic!("(n={n}, r={r}): {e}"));
            assert_eq!(rd.r, r);
            assert!(rd.phi_b > 0.3);
        }
    }

    #[test]
    fn random_exosystem_is_marginally_stable() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let exo = random_exosystem(&mut rng, 3);
        let phi = crate::transition::transition_matrix(&exo.s, 25.0, 0.0, 1e-3);
        // Orthogonal propagator: norms stay at one.
        assert!((phi.norm() - (3.0_f64).sqrt()).abs() < 1e-6);
    }
}
