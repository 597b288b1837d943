//! Canonical realization of an internal model: a uniformly decaying copy
//! (F_im, G_im, H_im) tied to the original (F, H) by a Lyapunov
//! transformation L(t), so a stabilizer can wrap the model with output
//! injection while the replayed trajectories are preserved.

use nalgebra::DMatrix;

use ltv_core::{Grid, MatrixSignal};

use crate::model::{InternalModel, Provenance, SigmaInit};
use crate::ImError;

/// Uniform-complete-observability floor: smallest accepted ratio of the
/// windowed Gramian's least eigenvalue to its trace.
const UCO_FLOOR: f64 = 1e-12;
/// Largest accepted condition number of L(t).
const COND_CEILING: f64 = 1e8;

#[derive(Clone, Debug)]
pub struct CanonicalOptions {
    pub horizon: f64,
    pub step: f64,
    /// Initial transformation L(t0); identity when absent.
    pub l0: Option<DMatrix<f64>>,
    /// Observability window length.
    pub window: f64,
    /// Spacing between observability window anchors.
    pub anchor_stride: f64,
}

impl Default for CanonicalOptions {
    fn default() -> Self {
        CanonicalOptions {
            horizon: 50.0,
            step: 1e-3,
            l0: None,
            window: std::f64::consts::TAU,
            anchor_stride: 1.0,
        }
    }
}

/// The decaying realization together with the transformation that links
/// it back to the source model.
#[derive(Clone)]
pub struct CanonicalRealization {
    /// Decaying generator `−α·I − Fᵀ`.
    pub f_im: MatrixSignal,
    /// Injection column `Hᵀ`.
    pub g_im: MatrixSignal,
    /// Rebased readout `H·L⁻¹`, gridded (interpolated between nodes).
    pub h_im: MatrixSignal,
    /// The Lyapunov transformation L(t) on the working grid.
    pub l: Grid,
    /// Condition number of L at every grid node.
    pub cond: Vec<f64>,
    pub cond_max: f64,
    /// Least windowed-Gramian eigenvalue over its trace, worst window.
    pub uco_margin: f64,
    /// Largest deviation of `H_im(t)·L(t)` from `H(t)` on the grid.
    pub reconstruction_defect: f64,
    /// Decay rate α of the realization.
    pub alpha: f64,
    pub nu: usize,
    pub t0: f64,
}

impl CanonicalRealization {
    /// Repackage as an internal model `(F_im + G_im·H_im, H_im)`; the
    /// initial seeds of the source carry over through `L(t0)`.
    pub fn as_internal_model(&self, source: &InternalModel) -> InternalModel {
        let f = self.f_im.clone() + self.g_im.clone() * self.h_im.clone();
        let sigma = source.sigma.as_ref().map(|s| SigmaInit::Transformed {
            l0: self.l.node(0).clone(),
            inner: Box::new(s.clone()),
        });
        InternalModel::new(f, self.h_im.clone(), Provenance::Canonical, sigma, self.t0)
    }
}

/// Build the canonical realization: check uniform complete observability
/// of (F, H), integrate `L̇ = −α·L − Fᵀ·L − L·F + Hᵀ·H` from L(t0), and
/// read the realization off as `F_im = −α·I − Fᵀ`, `G_im = Hᵀ`,
/// `H_im = H·L⁻¹`.
pub fn canonical_realization(
    im: &InternalModel,
    alpha: f64,
    opts: &CanonicalOptions,
) -> Result<CanonicalRealization, ImError> {
    assert!(alpha > 0.0, "decay rate must be positive");
    let nu = im.nu;
    let t0 = im.t0;
    let step = opts.step;
    let len = (opts.horizon / step).round() as usize + 1;

    let phi_f = im.transition(opts.horizon, step);
    let q: Vec<DMatrix<f64>> = (0..phi_f.len())
        .map(|k| im.h.eval(phi_f.node_time(k)) * phi_f.node(k))
        .collect();

    let margin = uco_margin(&q, &phi_f, opts)?;
    if margin < UCO_FLOOR {
        return Err(ImError::ObservabilityTooWeak { margin });
    }

    // L ODE, classical fourth-order steps with exact stage evaluation.
    let l0 = opts
        .l0
        .clone()
        .unwrap_or_else(|| DMatrix::identity(nu, nu));
    assert_eq!(l0.shape(), (nu, nu), "initial transformation shape");
    assert!(
        l0.clone().try_inverse().is_some(),
        "initial transformation must be invertible"
    );
    let rhs = |t: f64, l: &DMatrix<f64>| -> DMatrix<f64> {
        let f = im.f.eval(t);
        let h = im.h.eval(t);
        -alpha * l - f.transpose() * l - l * f + h.transpose() * h
    };
    let mut l_nodes: Vec<DMatrix<f64>> = Vec::with_capacity(len);
    let mut l = l0;
    l_nodes.push(l.clone());
    for k in 0..len - 1 {
        let t = t0 + k as f64 * step;
        let k1 = rhs(t, &l);
        let k2 = rhs(t + 0.5 * step, &(&l + 0.5 * step * &k1));
        let k3 = rhs(t + 0.5 * step, &(&l + 0.5 * step * &k2));
        let k4 = rhs(t + step, &(&l + step * &k3));
        l += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        l_nodes.push(l.clone());
    }

    // Condition monitoring and the rebased readout, node by node.
    let mut cond = Vec::with_capacity(len);
    let mut cond_max = 0.0_f64;
    let mut h_nodes = Vec::with_capacity(len);
    let mut defect = 0.0_f64;
    for (k, lk) in l_nodes.iter().enumerate() {
        let t = t0 + k as f64 * step;
        let sv = lk.clone().svd(false, false).singular_values;
        let smax = sv.iter().fold(0.0_f64, |m, &v| m.max(v));
        let smin = sv.iter().fold(f64::INFINITY, |m, &v| m.min(v));
        let c = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if c > COND_CEILING {
            return Err(ImError::IllConditionedTransform { cond: c, t });
        }
        cond.push(c);
        cond_max = cond_max.max(c);
        let l_inv = lk.clone().try_inverse().expect("condition number bounded");
        let h_here = im.h.eval(t);
        let h_im_here = &h_here * l_inv;
        defect = defect.max((&h_im_here * lk - h_here).amax());
        h_nodes.push(h_im_here);
    }

    let alpha_id = MatrixSignal::constant(DMatrix::from_diagonal_element(nu, nu, alpha));
    let f_src = im.f.clone();
    let f_im = MatrixSignal::opaque(nu, nu, im.f.smoothness().unwrap_or(2), move |t| {
        -f_src.eval(t).transpose()
    }) - alpha_id;
    let h_src = im.h.clone();
    let g_im = MatrixSignal::opaque(nu, 1, im.h.smoothness().unwrap_or(2), move |t| {
        h_src.eval(t).transpose()
    });
    let h_im = MatrixSignal::from_grid(Grid::new(t0, step, h_nodes));

    Ok(CanonicalRealization {
        f_im,
        g_im,
        h_im,
        l: Grid::new(t0, step, l_nodes),
        cond,
        cond_max,
        uco_margin: margin,
        reconstruction_defect: defect,
        alpha,
        nu,
        t0,
    })
}

/// Worst ratio of least eigenvalue to trace over sliding observability
/// windows `[t_a, t_a + δ]`, each Gramian expressed in its own anchor
/// coordinates.
fn uco_margin(q: &[DMatrix<f64>], phi_f: &Grid, opts: &CanonicalOptions) -> Result<f64, ImError> {
    let step = opts.step;
    let len = q.len();
    let wlen = ((opts.window / step).round() as usize).max(1).min(len - 1);
    let stride = ((opts.anchor_stride / step).round() as usize).max(1);
    let mut margin = f64::INFINITY;
    let mut a = 0usize;
    loop {
        let end = a + wlen;
        if end > len - 1 {
            break;
        }
        let mut g = DMatrix::zeros(q[0].ncols(), q[0].ncols());
        for k in a..=end {
            g += step * (q[k].transpose() * &q[k]);
        }
        g -= 0.5 * step * (q[a].transpose() * &q[a]);
        g -= 0.5 * step * (q[end].transpose() * &q[end]);
        let x_inv = phi_f
            .node(a)
            .clone()
            .try_inverse()
            .expect("transition matrices are invertible");
        let anchored = x_inv.transpose() * g * &x_inv;
        let tr = anchored.trace();
        let eig = anchored.symmetric_eigen();
        let emin = eig.eigenvalues.iter().fold(f64::INFINITY, |m, &v| m.min(v));
        let ratio = if tr > 0.0 { (emin / tr).max(0.0) } else { 0.0 };
        margin = margin.min(ratio);
        if a == 0 && wlen == len - 1 {
            break;
        }
        a += stride;
    }
    if !margin.is_finite() {
        return Ok(0.0);
    }
    Ok(margin)
}
