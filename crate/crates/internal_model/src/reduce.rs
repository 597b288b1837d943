//! Dimension lowering for internal models: windowed observability
//! screening, projection onto the range actually reached by the initial
//! seeds, and exchange of the generator for a different marginally stable
//! one (including the frozen zero generator the reduction emits).

use nalgebra::DMatrix;

use ltv_core::{transition_grid, Grid, MatrixSignal};

use crate::model::{InternalModel, Provenance, SigmaInit};
use crate::ImError;

/// Gramian eigenvalues below this fraction of the largest count as a true
/// structural null direction (amplitudes at roundoff, not merely weak).
const NULL_REL_TOL: f64 = 1e-12;
/// Allowed principal-angle defect between per-anchor null spaces.
const ANGLE_TOL: f64 = 1e-8;
/// Allowed relative leakage of F out of the null subspace.
const INVARIANCE_TOL: f64 = 1e-8;
/// Transition sup above which a replacement generator is refused.
const MARGINAL_SUP: f64 = 100.0;

#[derive(Clone, Debug)]
pub struct ReduceOptions {
    pub horizon: f64,
    pub step: f64,
    /// Observability window length δ.
    pub window: f64,
    /// Number of window anchors spread over the horizon.
    pub anchors: usize,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        ReduceOptions {
            horizon: 50.0,
            step: 1e-3,
            window: std::f64::consts::TAU,
            anchors: 3,
        }
    }
}

/// What the reduction found and kept.
#[derive(Clone, Debug)]
pub struct ReduceReport {
    /// Null directions of the windowed observability Gramians.
    pub gramian_deficiency: usize,
    /// True when the deficiency was usable: the null space is constant
    /// across anchors and invariant under the generator, so it could be
    /// removed by a constant projection.  False means the deficiency was
    /// only reported and the projection ran on the full state.
    pub constant_similarity: bool,
    /// Retained dimension ν′.
    pub retained: usize,
    /// Seed-stack directions discarded below the tolerance.
    pub discarded_directions: usize,
    /// Singular values of the projected seed stack, largest first.
    pub singular_values: Vec<f64>,
}

/// Lower the model dimension: remove structurally unobservable directions
/// (when a constant projection suffices), then keep only the singular
/// directions the initial seeds Σ(t0, μ) actually excite over the given
/// parameter samples.  The result replays the same trajectories through a
/// frozen zero generator with `H′(t) = H(t) Φ_F(t, t0) V`.
pub fn reduce_im(
    im: &InternalModel,
    mu_samples: &[Vec<f64>],
    tol: f64,
    opts: &ReduceOptions,
) -> Result<(InternalModel, ReduceReport), ImError> {
    if tol <= 0.0 {
        return Err(ImError::BadTolerance { value: tol });
    }
    let sigma = im
        .sigma
        .as_ref()
        .expect("reduction needs the initial-seed map of the source model");
    let need = sigma.mu_dim() + 1;
    if mu_samples.len() < need {
        return Err(ImError::TooFewSamples { got: mu_samples.len(), need });
    }

    let nu = im.nu;
    let phi_f = im.transition(opts.horizon, opts.step);
    let q: Vec<DMatrix<f64>> = (0..phi_f.len())
        .map(|k| im.h.eval(phi_f.node_time(k)) * phi_f.node(k))
        .collect();

    // Windowed observability Gramians, expressed in t0 coordinates so the
    // null spaces of different anchors are directly comparable.
    let wlen = ((opts.window / opts.step).round() as usize).min(phi_f.len() - 1);
    let anchors: Vec<usize> = if phi_f.len() - 1 <= wlen || opts.anchors <= 1 {
        vec![0]
    } else {
        let span = phi_f.len() - 1 - wlen;
        (0..opts.anchors).map(|i| i * span / (opts.anchors - 1)).collect()
    };
    let mut nulls: Vec<DMatrix<f64>> = Vec::new();
    let mut deficiency = 0usize;
    let mut consistent = true;
    for (ai, &a) in anchors.iter().enumerate() {
        let w = windowed_gramian(&q, a, wlen, opts.step, nu);
        let eig = w.symmetric_eigen();
        let lmax = eig.eigenvalues.iter().fold(0.0_f64, |m, &v| m.max(v));
        let mut null_cols: Vec<usize> = (0..nu)
            .filter(|&i| eig.eigenvalues[i] <= NULL_REL_TOL * lmax)
            .collect();
        null_cols.sort_by(|&i, &j| {
            eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap()
        });
        let d = null_cols.len();
        if ai == 0 {
            deficiency = d;
        } else if d != deficiency {
            consistent = false;
            deficiency = deficiency.max(d);
        }
        let mut n = DMatrix::zeros(nu, d);
        for (c, &i) in null_cols.iter().enumerate() {
            n.column_mut(c).copy_from(&eig.eigenvectors.column(i));
        }
        nulls.push(n);
    }

    // The deficiency is usable only when it is the same subspace at every
    // anchor and the generator keeps it invariant.
    let mut constant_similarity = deficiency == 0;
    let mut p_obs = DMatrix::identity(nu, nu);
    if deficiency > 0 && consistent {
        let n0 = &nulls[0];
        let mut aligned = true;
        for n in &nulls[1..] {
            let overlap = n0.transpose() * n;
            let smin = overlap.singular_values().iter().fold(f64::INFINITY, |m, &v| m.min(v));
            if 1.0 - smin > ANGLE_TOL {
                aligned = false;
                break;
            }
        }
        if aligned && f_invariant(&im.f, n0, im.t0, opts.horizon) {
            p_obs -= n0 * n0.transpose();
            constant_similarity = true;
        }
    }

    // Projection: which directions do the seeds actually reach?
    let rho = sigma.at(&mu_samples[0]).ncols();
    let mut stack = DMatrix::zeros(nu, rho * mu_samples.len());
    for (j, mu) in mu_samples.iter().enumerate() {
        let s = &p_obs * sigma.at(mu);
        stack.view_mut((0, j * rho), (nu, rho)).copy_from(&s);
    }
    let svd = stack.svd(true, false);
    let sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
    let sv_max = sv.iter().fold(0.0_f64, |m, &v| m.max(v));
    let kept = sv.iter().filter(|&&s| s >= tol * sv_max).count();
    assert!(kept > 0, "the seed stack is identically zero; nothing to retain");
    let u = svd.u.expect("left singular vectors requested");
    let v = u.view((0, 0), (nu, kept)).into_owned();

    let h_values: Vec<DMatrix<f64>> = q.iter().map(|row| row * &v).collect();
    let h_grid = Grid::new(im.t0, opts.step, h_values);
    let reduced = InternalModel::new(
        MatrixSignal::zeros(kept, kept),
        MatrixSignal::from_grid(h_grid),
        Provenance::Reduced,
        Some(SigmaInit::Projected { v: v.clone(), inner: Box::new(sigma.clone()) }),
        im.t0,
    );
    let report = ReduceReport {
        gramian_deficiency: deficiency,
        constant_similarity,
        retained: kept,
        discarded_directions: nu - kept,
        singular_values: sv,
    };
    Ok((reduced, report))
}

/// Replace the generator: the readout is rebased so every replayed
/// trajectory is preserved exactly, with the seed map corrected by the
/// constant factor `Φ_{F′}(t0, t0_ref) Φ_F(t0_ref, t0)`.
pub fn shift_im(
    im: &InternalModel,
    f_new: &MatrixSignal,
    t0_ref: f64,
    opts: &ReduceOptions,
) -> Result<InternalModel, ImError> {
    assert_eq!(f_new.rows(), im.nu, "replacement generator must match the dimension");
    assert_eq!(f_new.cols(), im.nu, "replacement generator must be square");
    let probe = InternalModel::new(
        f_new.clone(),
        MatrixSignal::zeros(1, im.nu),
        Provenance::Shifted,
        None,
        im.t0,
    )
    .marginal_probe(opts.horizon.min(20.0), 1e-2);
    if probe > MARGINAL_SUP {
        return Err(ImError::UnstableShiftTarget { sup: probe });
    }

    let phi_f = im.transition(opts.horizon, opts.step);
    let phi_new = transition_grid(f_new, im.t0, im.t0 + opts.horizon, opts.step);
    let x_ref = phi_f.eval(t0_ref);
    let y_ref = phi_new.eval(t0_ref);
    let x_ref_inv = x_ref.clone().try_inverse().expect("source transition is invertible");
    let y_ref_inv = y_ref.clone().try_inverse().expect("target transition is invertible");
    let m_ref = &x_ref_inv * &y_ref;

    let h_values: Vec<DMatrix<f64>> = (0..phi_f.len())
        .map(|k| {
            let y_inv = phi_new
                .node(k)
                .clone()
                .try_inverse()
                .expect("target transition is invertible");
            im.h.eval(phi_f.node_time(k)) * phi_f.node(k) * &m_ref * y_inv
        })
        .collect();
    let h_grid = Grid::new(im.t0, opts.step, h_values);

    let sigma = im.sigma.as_ref().map(|s| SigmaInit::Transformed {
        l0: &y_ref_inv * &x_ref,
        inner: Box::new(s.clone()),
    });
    Ok(InternalModel::new(
        f_new.clone(),
        MatrixSignal::from_grid(h_grid),
        Provenance::Shifted,
        sigma,
        im.t0,
    ))
}

fn windowed_gramian(q: &[DMatrix<f64>], a: usize, wlen: usize, step: f64, nu: usize) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(nu, nu);
    let end = (a + wlen).min(q.len() - 1);
    for (k, row) in q.iter().enumerate().take(end + 1).skip(a) {
        let weight = if k == a || k == end { 0.5 * step } else { step };
        w += weight * (row.transpose() * row);
    }
    w
}

/// Does F map the subspace spanned by `n` into itself, at sampled times?
fn f_invariant(f: &MatrixSignal, n: &DMatrix<f64>, t0: f64, horizon: f64) -> bool {
    let p_perp = DMatrix::identity(n.nrows(), n.nrows()) - n * n.transpose();
    (0..=16).all(|i| {
        let t = t0 + horizon * i as f64 / 16.0;
        let ft = f.eval(t);
        let leak = (&p_perp * &ft * n).norm();
        leak <= INVARIANCE_TOL * ft.norm().max(1.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Monomial;
    use nalgebra::dmatrix;

    fn rotation() -> MatrixSignal {
        MatrixSignal::constant(dmatrix![0.0, 1.0; -1.0, 0.0])
    }

    #[test]
    fn parallel_readout_blocks_are_merged() {
        // Two copies of a rotation driven through proportional readout
        // rows: half the state is structurally unobservable and the
        // reduction should find exactly that half.
        let f = crate::build::block_diag_copies(&rotation(), 2);
        let h = MatrixSignal::block(vec![vec![
            MatrixSignal::constant(dmatrix![2.6, 0.0]),
            MatrixSignal::constant(dmatrix![1.0, 0.0]),
        ]]);
        let sigma = SigmaInit::BlockMonomials {
            monomials: vec![Monomial::one(), Monomial::var(0)],
            rho: 2,
        };
        let im = InternalModel::new(f, h, Provenance::InteractionRobust, Some(sigma), 0.0);
        let opts = ReduceOptions { horizon: 15.0, ..Default::default() };
        let samples = vec![vec![0.25], vec![0.75]];
        let (red, report) = reduce_im(&im, &samples, 1e-8, &opts).unwrap();

        assert_eq!(report.gramian_deficiency, 2);
        assert!(report.constant_similarity);
        assert_eq!(report.retained, 2);
        assert_eq!(red.nu, 2);
        assert!(matches!(red.provenance, Provenance::Reduced));

        // Replay through the frozen generator must match the original
        // model, including at a parameter value not in the sample set.
        let phi = im.transition(opts.horizon, opts.step);
        let mu = vec![0.5];
        let s_old = im.sigma.as_ref().unwrap().at(&mu);
        let s_new = red.sigma.as_ref().unwrap().at(&mu);
        for &t in &[0.9_f64, 4.3, 11.7] {
            let old = im.h.eval(t) * phi.eval(t) * &s_old;
            let new = red.h.eval(t) * &s_new;
            assert!((old - new).amax() < 1e-9);
        }
    }

    #[test]
    fn exchanging_the_generator_for_itself_changes_nothing() {
        let h = MatrixSignal::block(vec![vec![
            MatrixSignal::sinusoid(1.0, 1.0, 0.0),
            MatrixSignal::scalar(2.0) + MatrixSignal::sinusoid(1.0, 1.0, -1.2),
        ]]);
        let sigma = SigmaInit::BlockMonomials { monomials: vec![Monomial::one()], rho: 2 };
        let im = InternalModel::new(rotation(), h, Provenance::Nominal, Some(sigma), 0.0);
        let opts = ReduceOptions { horizon: 10.0, ..Default::default() };
        let shifted = shift_im(&im, &rotation(), 3.0, &opts).unwrap();
        for &t in &[0.5_f64, 4.2, 9.5] {
            assert!((shifted.h.eval(t) - im.h.eval(t)).amax() < 1e-6);
        }
        match shifted.sigma.as_ref().unwrap() {
            SigmaInit::Transformed { l0, .. } => {
                assert!((l0 - DMatrix::identity(2, 2)).amax() < 1e-6);
            }
            other => panic!("expected a transformed seed map, got {other:?}"),
        }
    }

    #[test]
    fn growing_replacement_generators_are_refused() {
        let im = InternalModel::new(
            MatrixSignal::zeros(1, 1),
            MatrixSignal::scalar(1.0),
            Provenance::Nominal,
            None,
            0.0,
        );
        let bad = MatrixSignal::scalar(0.3);
        match shift_im(&im, &bad, 0.0, &ReduceOptions::default()) {
            Err(ImError::UnstableShiftTarget { sup }) => assert!(sup > MARGINAL_SUP),
            other => panic!("expected a refusal, got {other:?}"),
        }
    }
}
