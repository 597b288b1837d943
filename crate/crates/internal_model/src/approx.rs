//! Truncated-series internal models for uncertainty in the plant matrices
//! themselves: the zero-dynamics block η(t, μ) and the control gain
//! b(t, μ).  The feedforward row R(t, μ) is expanded into μ-monomial
//! coefficient rows — a Neumann series in the gain perturbation times an
//! iterated-integral (Peano-Baker style) series in the zero-dynamics
//! perturbation — and each retained monomial becomes one exosystem block
//! of the model.  The discarded tail carries a computable sup-norm bound.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use ltv_core::envelope::spectral_norm;
use ltv_core::{stability_envelope, Exosystem, Grid, MatrixSignal, UncertainPlant};

use crate::build::{block_diag_copies, channel_signal, hstack_rows};
use crate::model::{InternalModel, Monomial, Provenance, SigmaInit};
use crate::ImError;

/// Coefficient rows whose amplitude falls below this fraction of the
/// largest row are dropped (the constant row is always kept).
const ROW_FLOOR: f64 = 1e-12;
/// Structural screening tolerance for "this entry is identically zero".
const SHAPE_TOL: f64 = 1e-11;
/// Weakest acceptable fitted decay rate for the nominal zero dynamics.
const MIN_DECAY: f64 = 1e-4;

#[derive(Clone, Debug)]
pub struct ApproxImOptions {
    pub t0: f64,
    pub horizon: f64,
    pub step: f64,
}

impl Default for ApproxImOptions {
    fn default() -> Self {
        ApproxImOptions { t0: 0.0, horizon: 50.0, step: 1e-3 }
    }
}

/// What the truncated construction measured and what it guarantees.
#[derive(Clone, Debug)]
pub struct ApproxIMReport {
    pub k_b: usize,
    pub k_eta: usize,
    /// Active gain / zero-dynamics channel counts.
    pub n_b: usize,
    pub n_eta: usize,
    /// Fitted decay envelope of the nominal zero dynamics:
    /// ‖Φ_{η0}(t, s)‖ ≤ φ1 e^{−φ2 (t−s)}.
    pub phi1: f64,
    pub phi2: f64,
    /// inf_t |b0(t)|: how far the nominal gain stays from zero.
    pub phi_b: f64,
    /// Box radius × largest gain-channel magnitude.
    pub g1: f64,
    /// Box radius × largest zero-dynamics-channel norm.
    pub g2: f64,
    /// Measured amplitude of the assembled series factors (≥ 1).
    pub phi_sup: f64,
    /// Sup-norm bound on the part of the feedforward row the truncation
    /// discards, valid over the whole uncertainty box.
    pub bound_r: f64,
    /// Retained monomial count (the model dimension is term_count × ρ).
    pub term_count: usize,
    /// Which μ-monomial each retained block carries, in block order.
    pub labels: Vec<String>,
    /// Coefficient rows dropped below the relative floor.
    pub dropped: usize,
}

/// Tail of the geometric gain-inverse series after `k_b` kept orders:
/// `(g1 N_b / φ_b)^{k_b+1} / (φ_b − g1 N_b)`.
pub fn neumann_tail_bound(g1: f64, n_b: usize, phi_b: f64, k_b: usize) -> f64 {
    let x = g1 * n_b as f64 / phi_b;
    x.powi(k_b as i32 + 1) / (phi_b - g1 * n_b as f64)
}

/// Pointwise bound on the transition-matrix defect left after `k_eta`
/// iterated corrections over an elapsed time `dt`:
/// `φ1 e^{−(φ2 − φ1 g) dt} (φ1 g dt)^{k+1} / (k+1)!` with `g = g2·N_η`.
pub fn peano_baker_local_bound(phi1: f64, phi2: f64, g: f64, k_eta: usize, dt: f64) -> f64 {
    let mut fact = 1.0;
    for i in 2..=(k_eta as u64 + 1) {
        fact *= i as f64;
    }
    phi1 * (-(phi2 - phi1 * g) * dt).exp() * (phi1 * g * dt).powi(k_eta as i32 + 1) / fact
}

/// Sup-norm bound on the feedforward-row truncation error over the box:
/// the measured series amplitude times the geometric gain tail plus the
/// integrated zero-dynamics tail.  Finite and positive only under the
/// smallness conditions `g1 N_b < φ_b` and `φ1 g2 N_η < φ2`.
#[allow(clippy::too_many_arguments)]
pub fn truncation_bound(
    phi_sup: f64,
    phi1: f64,
    phi2: f64,
    phi_b: f64,
    g1: f64,
    g2: f64,
    n_b: usize,
    n_eta: usize,
    k_b: usize,
    k_eta: usize,
) -> f64 {
    let nb = n_b as f64;
    let nh = n_eta as f64;
    let neumann = (g1 * nb / phi_b).powi(k_b as i32 + 1);
    let d = phi2 - phi1 * g2 * nh;
    let pb = (phi1 / d) * (phi1 * g2 * nh / d).powi(k_eta as i32 + 1);
    phi_sup / (phi_b - g1 * nb) * (neumann + pb)
}

/// μ-monomial series with matrix-grid coefficients, ordered graded-lex.
type Series = BTreeMap<Monomial, Grid>;

fn series_accumulate(into: &mut Series, m: Monomial, g: Grid) {
    match into.remove(&m) {
        Some(prev) => {
            into.insert(m, prev.zip(&g, |a, b| a + b));
        }
        None => {
            into.insert(m, g);
        }
    }
}

/// Full product of two series: every monomial pair, node-wise matrix
/// products, nothing re-truncated.
fn series_mul(a: &Series, b: &Series) -> Series {
    let mut out = Series::new();
    for (ma, ga) in a {
        for (mb, gb) in b {
            series_accumulate(&mut out, ma.times(mb), ga.zip(gb, |x, y| x * y));
        }
    }
    out
}

/// Largest node-wise Frobenius norm.
fn sup_fro(g: &Grid) -> f64 {
    g.values().iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// A rectangular sub-block of a signal, evaluated lazily.
fn view_sig(m: &MatrixSignal, r0: usize, c0: usize, nr: usize, nc: usize) -> MatrixSignal {
    let m = m.clone();
    MatrixSignal::opaque(nr, nc, 2, move |t| m.eval(t).view((r0, c0), (nr, nc)).into_owned())
}

/// Sup of a signal's entries over a coarse probe of the window.
fn probe_sup(sig: &MatrixSignal, t0: f64, horizon: f64) -> f64 {
    (0..=100)
        .map(|i| sig.eval(t0 + horizon * i as f64 / 100.0).amax())
        .fold(0.0, f64::max)
}

/// One forcing cascade: level 0 integrates a forcing base, level j ≥ 1 is
/// driven by a zero-dynamics channel acting on its parent.
struct CascDef {
    parent: Option<usize>,
    eta: Option<usize>,
    base: Option<usize>,
    monomial: Monomial,
}

/// Build the truncated robust model for a plant whose uncertainty enters
/// the first row of A (exactly), the zero-dynamics block of A (to order
/// `k_eta`), the control gain (to order `k_b`), and the disturbance rows
/// (exactly).  `mu_box` is the sup-norm radius of the parameter box the
/// bound must cover.
pub fn plant_approx_im(
    plant: &UncertainPlant,
    exo: &Exosystem,
    mu_box: f64,
    k_b: usize,
    k_eta: usize,
    opts: &ApproxImOptions,
) -> Result<(InternalModel, ApproxIMReport), ImError> {
    assert!(mu_box > 0.0, "parameter box radius must be positive");
    let n = plant.n();
    let rho = exo.dim();
    let nl = n - 1;
    let (t0, horizon, step) = (opts.t0, opts.horizon, opts.step);
    let len = (horizon / step).round() as usize + 1;

    // --- structural screening -------------------------------------------
    if !plant.c.channels.is_empty() {
        return Err(ImError::UnsupportedChannel { target: "C".into() });
    }
    let mut e1 = DMatrix::zeros(1, n);
    e1[(0, 0)] = 1.0;
    let c_defect = probe_sup(&(&plant.c.nominal - &MatrixSignal::constant(e1)), t0, horizon);
    if c_defect > SHAPE_TOL {
        return Err(ImError::NotNormalForm {
            why: "the error map must read exactly the first state".into(),
        });
    }
    if nl > 0 {
        let b_low = probe_sup(&view_sig(&plant.b.nominal, 1, 0, nl, 1), t0, horizon);
        if b_low > SHAPE_TOL {
            return Err(ImError::NotNormalForm {
                why: "the input must enter only the first state equation".into(),
            });
        }
        for (_, e) in &plant.b.channels {
            if probe_sup(&view_sig(e, 1, 0, nl, 1), t0, horizon) > SHAPE_TOL {
                return Err(ImError::UnsupportedChannel {
                    target: "B below the output row".into(),
                });
            }
        }
        for (_, e) in &plant.a.channels {
            if probe_sup(&view_sig(e, 1, 0, nl, 1), t0, horizon) > SHAPE_TOL {
                return Err(ImError::UnsupportedChannel {
                    target: "the zero-dynamics coupling column of A".into(),
                });
            }
        }
    }

    // --- coefficient extraction -----------------------------------------
    let b0_g = plant.b.nominal.sample(t0, step, len).map(|_, m| {
        DMatrix::from_element(1, 1, m[(0, 0)])
    });
    let phi_b = b0_g.values().iter().map(|v| v[(0, 0)].abs()).fold(f64::INFINITY, f64::min);
    if phi_b < 1e-9 {
        return Err(ImError::NotNormalForm {
            why: "the control gain vanishes somewhere on the grid".into(),
        });
    }

    let eta0_sig = view_sig(&plant.a.nominal, 1, 1, nl, nl);
    let (phi1, phi2) = if nl > 0 {
        let env = stability_envelope(&eta0_sig, t0, horizon.min(30.0), 1e-2);
        if env.phi2 < MIN_DECAY {
            return Err(ImError::NotNormalForm {
                why: "the nominal zero dynamics do not decay on the window".into(),
            });
        }
        (env.phi1, env.phi2)
    } else {
        (1.0, 1.0)
    };

    // Per-channel pieces, kept as signals so integration stages evaluate
    // them exactly; activity is decided by a coarse sup probe.
    let beta0_sig = view_sig(&plant.a.nominal, 1, 0, nl, 1);
    let u0_sig =
        view_sig(&plant.p.nominal, 1, 0, nl, rho) - &beta0_sig * &plant.q.nominal.clone();

    let mut eta_channels: Vec<(usize, MatrixSignal, f64)> = Vec::new();
    let mut alpha_channels: Vec<(usize, MatrixSignal)> = Vec::new();
    let mut b_channels: Vec<(usize, MatrixSignal, f64)> = Vec::new();
    let mut u_channels: Vec<(usize, MatrixSignal)> = Vec::new();
    let mut q_channels: Vec<(usize, MatrixSignal)> = Vec::new();
    let mut pu_channels: Vec<(usize, MatrixSignal)> = Vec::new();
    for i in 0..plant.mu_dim {
        if let Some(e_a) = channel_signal(&plant.a, i) {
            let alpha = view_sig(&e_a, 0, 0, 1, n);
            if probe_sup(&alpha, t0, horizon) > 0.0 {
                alpha_channels.push((i, alpha));
            }
            if nl > 0 {
                let eta = view_sig(&e_a, 1, 1, nl, nl);
                let sup = grid_spectral_sup(&eta.sample(t0, step, len));
                if sup > 0.0 {
                    eta_channels.push((i, eta, sup));
                }
            }
        }
        if let Some(e_b) = channel_signal(&plant.b, i) {
            let gain = view_sig(&e_b, 0, 0, 1, 1);
            let sup = gain.sample(t0, step, len).sup_norm();
            if sup > 0.0 {
                b_channels.push((i, gain, sup));
            }
        }
        let e_q = channel_signal(&plant.q, i);
        let e_p = channel_signal(&plant.p, i);
        if let Some(e_q) = &e_q {
            if probe_sup(e_q, t0, horizon) > 0.0 {
                q_channels.push((i, e_q.clone()));
            }
        }
        if let Some(e_p) = &e_p {
            let pu = view_sig(e_p, 0, 0, 1, rho);
            if probe_sup(&pu, t0, horizon) > 0.0 {
                pu_channels.push((i, pu));
            }
        }
        if nl > 0 {
            let e_pl = e_p
                .as_ref()
                .map(|e| view_sig(e, 1, 0, nl, rho))
                .unwrap_or_else(|| MatrixSignal::zeros(nl, rho));
            let e_u = match &e_q {
                Some(e_q) => e_pl - &beta0_sig * &e_q.clone(),
                None => e_pl,
            };
            if probe_sup(&e_u, t0, horizon) > 0.0 {
                u_channels.push((i, e_u));
            }
        }
    }

    let n_b = b_channels.len();
    let n_eta = eta_channels.len();
    let g1 = mu_box * b_channels.iter().map(|&(_, _, s)| s).fold(0.0, f64::max);
    let g2 = mu_box * eta_channels.iter().map(|&(_, _, s)| s).fold(0.0, f64::max);

    // --- smallness gates --------------------------------------------------
    if n_b > 0 {
        let limit = phi_b / n_b as f64;
        if g1 >= limit {
            return Err(ImError::SmallnessViolated { which: "g1".into(), value: g1, limit });
        }
    }
    if n_eta > 0 {
        let limit = phi2 / (2.0 * phi1 * n_eta as f64);
        if g2 >= limit {
            return Err(ImError::SmallnessViolated { which: "g2".into(), value: g2, limit });
        }
    }

    // --- forcing cascades --------------------------------------------------
    let mut bases: Vec<(Monomial, MatrixSignal)> = Vec::new();
    if nl > 0 {
        bases.push((Monomial::one(), u0_sig));
        for (i, e_u) in &u_channels {
            bases.push((Monomial::var(*i), e_u.clone()));
        }
    }
    let mut defs: Vec<CascDef> = Vec::new();
    for (bi, (m, _)) in bases.iter().enumerate() {
        defs.push(CascDef { parent: None, eta: None, base: Some(bi), monomial: m.clone() });
    }
    let mut level_start = 0;
    for _ in 0..k_eta {
        let level_end = defs.len();
        for p in level_start..level_end {
            for (j, (idx, _, _)) in eta_channels.iter().enumerate() {
                let monomial = defs[p].monomial.times(&Monomial::var(*idx));
                defs.push(CascDef { parent: Some(p), eta: Some(j), base: None, monomial });
            }
        }
        level_start = level_end;
    }
    assert!(defs.len() <= 4096, "cascade ladder exploded; lower the truncation orders");

    let casc_grids = integrate_cascades(
        &defs,
        &bases,
        &eta_channels,
        &eta0_sig,
        &exo.s,
        t0,
        step,
        len,
        nl,
        rho,
    )?;

    // --- series assembly ---------------------------------------------------
    // Π series: exact affine upper row (from Q), cascade sums below.
    let q0_g = plant.q.nominal.sample(t0, step, len);
    let mut pi_upper: Series = Series::new();
    pi_upper.insert(Monomial::one(), q0_g.map(|_, m| -m));
    for (i, e_q) in &q_channels {
        series_accumulate(&mut pi_upper, Monomial::var(*i), e_q.sample(t0, step, len).map(|_, m| -m));
    }
    let mut pi_series: Series = Series::new();
    for (m, upper) in &pi_upper {
        let lower = DMatrix::zeros(nl, rho);
        pi_series.insert(
            m.clone(),
            upper.map(|_, u| {
                let mut full = DMatrix::zeros(n, rho);
                full.view_mut((0, 0), (1, rho)).copy_from(u);
                full.view_mut((1, 0), (nl, rho)).copy_from(&lower);
                full
            }),
        );
    }
    for (d, g) in defs.iter().zip(&casc_grids) {
        let full = g.map(|_, low| {
            let mut m = DMatrix::zeros(n, rho);
            m.view_mut((1, 0), (nl, rho)).copy_from(low);
            m
        });
        let upper_part = pi_series.remove(&d.monomial);
        let merged = match upper_part {
            Some(u) => u.zip(&full, |a, b| a + b),
            None => full,
        };
        pi_series.insert(d.monomial.clone(), merged);
    }

    // α, Q-drift, and disturbance-row series are exactly affine.
    let mut alpha_series: Series = Series::new();
    alpha_series.insert(Monomial::one(), view_sig(&plant.a.nominal, 0, 0, 1, n).sample(t0, step, len));
    for (i, sig) in &alpha_channels {
        alpha_series.insert(Monomial::var(*i), sig.sample(t0, step, len));
    }
    let lie_q = |q: &MatrixSignal| (q.deriv() + q * &exo.s.clone()).sample(t0, step, len);
    let mut os_series: Series = Series::new();
    os_series.insert(Monomial::one(), lie_q(&plant.q.nominal));
    for (i, e_q) in &q_channels {
        os_series.insert(Monomial::var(*i), lie_q(e_q));
    }
    let mut pu_series: Series = Series::new();
    pu_series.insert(Monomial::one(), view_sig(&plant.p.nominal, 0, 0, 1, rho).sample(t0, step, len));
    for (i, sig) in &pu_channels {
        pu_series.insert(Monomial::var(*i), sig.sample(t0, step, len));
    }

    let mut g_series = series_mul(&alpha_series, &pi_series);
    for (m, g) in os_series {
        series_accumulate(&mut g_series, m, g);
    }
    for (m, g) in pu_series {
        series_accumulate(&mut g_series, m, g);
    }

    // Gain-inverse series: 1/b = (Σ_{j≤k_b} (−Σ μ_i ν_i)^j) / b0.
    let inv_b0 = b0_g.map(|_, m| DMatrix::from_element(1, 1, 1.0 / m[(0, 0)]));
    let mut d_series: Series = Series::new();
    for (i, sig, _) in &b_channels {
        let nu_i = sig.sample(t0, step, len).zip(&b0_g, |e, b| -e * b[(0, 0)].recip());
        d_series.insert(Monomial::var(*i), nu_i);
    }
    let ones = Grid::from_fn(t0, step, len, |_| DMatrix::from_element(1, 1, 1.0));
    let mut binv_series: Series = Series::new();
    binv_series.insert(Monomial::one(), ones.clone());
    let mut power: Series = Series::new();
    power.insert(Monomial::one(), ones);
    for _ in 0..k_b {
        power = series_mul(&power, &d_series);
        for (m, g) in &power {
            series_accumulate(&mut binv_series, m.clone(), g.clone());
        }
    }
    let binv_series: Series = binv_series
        .into_iter()
        .map(|(m, g)| (m, g.zip(&inv_b0, |a, b| a * b[(0, 0)])))
        .collect();

    let r_series: Series = series_mul(&binv_series, &g_series)
        .into_iter()
        .map(|(m, g)| (m, g.map(|_, v| -v)))
        .collect();

    // --- drop negligible rows, assemble the model --------------------------
    let scale = r_series.values().map(sup_fro).fold(0.0, f64::max);
    let mut kept: Vec<(Monomial, Grid)> = Vec::new();
    let mut dropped = 0usize;
    for (m, g) in r_series {
        if m.is_one() || sup_fro(&g) > ROW_FLOOR * scale {
            kept.push((m, g));
        } else {
            dropped += 1;
        }
    }

    let phi_sup = {
        let mut s = 1.0_f64;
        for g in g_series.values() {
            s = s.max(sup_fro(g));
        }
        for g in &casc_grids {
            s = s.max(sup_fro(g));
        }
        s
    };
    let bound_r = truncation_bound(phi_sup, phi1, phi2, phi_b, g1, g2, n_b, n_eta, k_b, k_eta);

    let monomials: Vec<Monomial> = kept.iter().map(|(m, _)| m.clone()).collect();
    let labels: Vec<String> = monomials.iter().map(|m| m.to_string()).collect();
    let h = hstack_rows(kept.iter().map(|(_, g)| g));
    let f = block_diag_copies(&exo.s, monomials.len());
    let im = InternalModel::new(
        f,
        MatrixSignal::from_grid(h),
        Provenance::PlantApprox { k_b, k_eta },
        Some(SigmaInit::BlockMonomials { monomials: monomials.clone(), rho }),
        t0,
    );
    let report = ApproxIMReport {
        k_b,
        k_eta,
        n_b,
        n_eta,
        phi1,
        phi2,
        phi_b,
        g1,
        g2,
        phi_sup,
        bound_r,
        term_count: im.nu / rho,
        labels,
        dropped,
    };
    Ok((im, report))
}

fn grid_spectral_sup(g: &Grid) -> f64 {
    g.values().iter().map(spectral_norm).fold(0.0, f64::max)
}

/// Integrate every cascade jointly with one fixed-step RK4 pass so that a
/// level-j stage always sees its parent's value at the same stage.
#[allow(clippy::too_many_arguments)]
fn integrate_cascades(
    defs: &[CascDef],
    bases: &[(Monomial, MatrixSignal)],
    eta_channels: &[(usize, MatrixSignal, f64)],
    eta0: &MatrixSignal,
    s: &MatrixSignal,
    t0: f64,
    step: f64,
    len: usize,
    nl: usize,
    rho: usize,
) -> Result<Vec<Grid>, ImError> {
    if defs.is_empty() {
        return Ok(Vec::new());
    }
    struct Coef {
        eta0: DMatrix<f64>,
        s: DMatrix<f64>,
        e_eta: Vec<DMatrix<f64>>,
        bases: Vec<DMatrix<f64>>,
    }
    let eval = |t: f64| Coef {
        eta0: eta0.eval(t),
        s: s.eval(t),
        e_eta: eta_channels.iter().map(|(_, sig, _)| sig.eval(t)).collect(),
        bases: bases.iter().map(|(_, sig)| sig.eval(t)).collect(),
    };
    let rhs = |c: &Coef, y: &[DMatrix<f64>]| -> Vec<DMatrix<f64>> {
        defs.iter()
            .enumerate()
            .map(|(i, d)| {
                let mut dy = &c.eta0 * &y[i] - &y[i] * &c.s;
                if let (Some(p), Some(j)) = (d.parent, d.eta) {
                    dy += &c.e_eta[j] * &y[p];
                } else if let Some(b) = d.base {
                    dy += &c.bases[b];
                }
                dy
            })
            .collect()
    };
    let shift = |y: &[DMatrix<f64>], k: &[DMatrix<f64>], a: f64| -> Vec<DMatrix<f64>> {
        y.iter().zip(k).map(|(yi, ki)| yi + a * ki).collect()
    };

    let mut y: Vec<DMatrix<f64>> = vec![DMatrix::zeros(nl, rho); defs.len()];
    let mut stored: Vec<Vec<DMatrix<f64>>> = vec![Vec::with_capacity(len); defs.len()];
    let mut c_here = eval(t0);
    for i in 0..len {
        for (store, v) in stored.iter_mut().zip(&y) {
            store.push(v.clone());
        }
        if i + 1 == len {
            break;
        }
        let t = t0 + step * i as f64;
        let c_mid = eval(t + 0.5 * step);
        let c_next = eval(t + step);
        let k1 = rhs(&c_here, &y);
        let k2 = rhs(&c_mid, &shift(&y, &k1, 0.5 * step));
        let k3 = rhs(&c_mid, &shift(&y, &k2, 0.5 * step));
        let k4 = rhs(&c_next, &shift(&y, &k3, step));
        for (yi, (((k1i, k2i), k3i), k4i)) in
            y.iter_mut().zip(k1.iter().zip(&k2).zip(&k3).zip(&k4))
        {
            *yi += step / 6.0 * (k1i + 2.0 * k2i + 2.0 * k3i + k4i);
            if yi.amax() > 1e12 {
                return Err(ImError::NotNormalForm {
                    why: "a forcing cascade diverged; the zero dynamics are not stable".into(),
                });
            }
        }
        c_here = c_next;
    }
    Ok(stored.into_iter().map(|vals| Grid::new(t0, step, vals)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gain_series_tail_matches_the_scalar_oracle() {
        // 1/(1 + 0.4) truncated after the linear term: 1 − 0.4 = 0.6.
        let err = (1.0_f64 / 1.4 - 0.6).abs();
        let bound = neumann_tail_bound(0.4, 1, 1.0, 1);
        assert!((bound - 0.4 * 0.4 / 0.6).abs() < 1e-12);
        assert!(err <= bound, "{err} > {bound}");
        assert!((err - 0.114286).abs() < 1e-6);
    }

    #[test]
    fn transition_defect_respects_the_local_bound() {
        // Scalar pair η0 = −1, perturbation 0.3: the zeroth-order defect
        // is e^{−0.7 t} − e^{−t}, bounded by 0.3 t e^{−0.7 t}.
        for i in 0..=200 {
            let t = 0.1 * i as f64;
            let defect = (-0.7 * t).exp() - (-t).exp();
            let bound = peano_baker_local_bound(1.0, 1.0, 0.3, 0, t);
            assert!(defect <= bound + 1e-12, "t = {t}: {defect} > {bound}");
        }
        let b1 = peano_baker_local_bound(1.0, 1.0, 0.3, 0, 1.0);
        assert!((b1 - 0.3 * (-0.7_f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn combined_bound_matches_hand_arithmetic() {
        // No gain channels, one zero-dynamics channel at strength 0.3,
        // unit envelopes, first order: (1/0.7)·(0.3/0.7)² = 0.09/0.343.
        let b = truncation_bound(1.0, 1.0, 1.0, 1.0, 0.0, 0.3, 0, 1, 0, 1);
        assert!((b - 0.09 / 0.343).abs() < 1e-12, "bound {b}");
        assert!(b > 0.128571, "must dominate the measured scalar error");
    }

    #[test]
    fn bound_decreases_in_both_truncation_orders() {
        let b = |kb: usize, ke: usize| {
            truncation_bound(1.0, 1.05, 1.0, 1.0, 0.2, 0.2, 1, 1, kb, ke)
        };
        for k in 0..5 {
            assert!(b(k + 1, 2) < b(k, 2), "not decreasing in the gain order at {k}");
            assert!(b(2, k + 1) < b(2, k), "not decreasing in the cascade order at {k}");
        }
        assert!(b(0, 0) > 0.0);
    }
}
