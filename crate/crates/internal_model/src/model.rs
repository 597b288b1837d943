//! The internal-model type, parameter monomials, seed mappings, and the
//! propagation-condition verifier.

use std::cmp::Ordering;
use std::fmt;

use nalgebra::DMatrix;

use ltv_core::{transition_grid, Exosystem, Grid, MatrixSignal};

/// A product of uncertainty parameters, `∏ μ_i^{k_i}`, stored as sorted
/// (index, power) pairs with powers ≥ 1.  The empty product is 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<(usize, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(i: usize) -> Self {
        Monomial(vec![(i, 1)])
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, k)| k).sum()
    }

    /// Largest parameter index mentioned, if any.
    pub fn max_var(&self) -> Option<usize> {
        self.0.last().map(|&(i, _)| i)
    }

    pub fn times(&self, other: &Monomial) -> Monomial {
        let mut out: Vec<(usize, u32)> = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&(ia, ka)), Some(&&(ib, kb))) => match ia.cmp(&ib) {
                    Ordering::Less => {
                        out.push((ia, ka));
                        a.next();
                    }
                    Ordering::Greater => {
                        out.push((ib, kb));
                        b.next();
                    }
                    Ordering::Equal => {
                        out.push((ia, ka + kb));
                        a.next();
                        b.next();
                    }
                },
                (Some(&&p), None) => {
                    out.push(p);
                    a.next();
                }
                (None, Some(&&p)) => {
                    out.push(p);
                    b.next();
                }
                (None, None) => break,
            }
        }
        Monomial(out)
    }

    pub fn eval(&self, mu: &[f64]) -> f64 {
        self.0
            .iter()
            .map(|&(i, k)| mu[i].powi(k as i32))
            .product()
    }
}

impl fmt::Display for Monomial {
    /// 1-based display: "1", "mu1", "mu1^2*mu2".
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        for &(i, k) in &self.0 {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if k == 1 {
                write!(f, "mu{}", i + 1)?;
            } else {
                write!(f, "mu{}^{}", i + 1, k)?;
            }
        }
        Ok(())
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    /// Graded lexicographic: lower total degree first; within a degree,
    /// walk the factors with earlier variables first and, for a shared
    /// variable, the higher power first (so mu1^2 precedes mu1*mu2).
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            for (a, b) in self.0.iter().zip(other.0.iter()) {
                match a.0.cmp(&b.0).then(b.1.cmp(&a.1)) {
                    Ordering::Equal => continue,
                    unequal => return unequal,
                }
            }
            self.0.len().cmp(&other.0.len())
        })
    }
}

/// How the model's initial state depends on the uncertainty parameter.
#[derive(Clone, Debug)]
pub enum SigmaInit {
    /// Σ(μ) = vstack of m_j(μ)·I_ρ over the listed monomials.
    BlockMonomials { monomials: Vec<Monomial>, rho: usize },
    /// Σ'(μ) = Vᵀ · Σ(μ): restriction onto the retained directions.
    Projected { v: DMatrix<f64>, inner: Box<SigmaInit> },
    /// Σ'(μ) = L₀ · Σ(μ): a constant similarity applied at t0.
    Transformed { l0: DMatrix<f64>, inner: Box<SigmaInit> },
}

impl SigmaInit {
    pub fn at(&self, mu: &[f64]) -> DMatrix<f64> {
        match self {
            SigmaInit::BlockMonomials { monomials, rho } => {
                let mut out = DMatrix::zeros(monomials.len() * rho, *rho);
                for (j, m) in monomials.iter().enumerate() {
                    let v = m.eval(mu);
                    for c in 0..*rho {
                        out[(j * rho + c, c)] = v;
                    }
                }
                out
            }
            SigmaInit::Projected { v, inner } => v.transpose() * inner.at(mu),
            SigmaInit::Transformed { l0, inner } => l0 * inner.at(mu),
        }
    }

    /// Number of parameters the mapping reads (0 when Σ is constant).
    pub fn mu_dim(&self) -> usize {
        match self {
            SigmaInit::BlockMonomials { monomials, .. } => monomials
                .iter()
                .filter_map(|m| m.max_var())
                .map(|i| i + 1)
                .max()
                .unwrap_or(0),
            SigmaInit::Projected { inner, .. } | SigmaInit::Transformed { inner, .. } => {
                inner.mu_dim()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    Nominal,
    InteractionRobust,
    PlantApprox { k_b: usize, k_eta: usize },
    Reduced,
    Shifted,
    Canonical,
}

/// A marginally stable pair (F, H) with an optional initial-seed map.
#[derive(Clone, Debug)]
pub struct InternalModel {
    /// Generator, ν×ν.
    pub f: MatrixSignal,
    /// Readout row, 1×ν (often a gridded signal).
    pub h: MatrixSignal,
    pub nu: usize,
    pub provenance: Provenance,
    pub sigma: Option<SigmaInit>,
    pub t0: f64,
}

impl InternalModel {
    pub fn new(
        f: MatrixSignal,
        h: MatrixSignal,
        provenance: Provenance,
        sigma: Option<SigmaInit>,
        t0: f64,
    ) -> Self {
        let nu = f.rows();
        assert_eq!(f.cols(), nu, "generator must be square");
        assert_eq!(h.rows(), 1, "readout must be a row");
        assert_eq!(h.cols(), nu, "readout width must match the generator");
        InternalModel { f, h, nu, provenance, sigma, t0 }
    }

    /// Forward transition grid Φ_F(t, t0) over [t0, t0 + horizon].
    pub fn transition(&self, horizon: f64, step: f64) -> Grid {
        transition_grid(&self.f, self.t0, self.t0 + horizon, step)
    }

    /// Marginal-stability probe: sup over sampled pairs (t, s) of
    /// ‖Φ_F(t, s)‖.  Finite and moderate for a usable generator.
    pub fn marginal_probe(&self, horizon: f64, step: f64) -> f64 {
        let phi = self.transition(horizon, step);
        let mut sup = 0.0_f64;
        let anchors = 8.min(phi.len());
        for ai in 0..anchors {
            let ka = ai * (phi.len() - 1) / anchors.max(1);
            let inv = match phi.node(ka).clone().try_inverse() {
                Some(m) => m,
                None => return f64::INFINITY,
            };
            for kb in 0..8 {
                let kt = ka + (kb + 1) * (phi.len() - 1 - ka) / 8;
                let m = phi.node(kt) * &inv;
                sup = sup.max(ltv_core::envelope::spectral_norm(&m));
            }
        }
        sup
    }
}

/// One parameter point of a propagation fit.
#[derive(Clone, Debug)]
pub struct MuFit {
    pub mu: Vec<f64>,
    pub sigma: DMatrix<f64>,
    pub residual: f64,
}

/// Least-squares fits of Σ(t0, μ) for a family of feedforward grids.
#[derive(Clone, Debug)]
pub struct PropagationFit {
    pub per_mu: Vec<MuFit>,
    pub max_residual: f64,
    /// True when every normal system had full numerical rank.
    pub full_rank: bool,
}

/// Fit Σ(t0, μ) minimizing ‖R(t,μ)Φ_S(t,t0) − H(t)Φ_F(t,t0)Σ‖ over the
/// post-washout grid, one least-squares problem per parameter sample.
/// The residual reported per μ is the sup over fitted grid rows.
pub fn verify_propagation(
    im: &InternalModel,
    r_samples: &[(Vec<f64>, Grid)],
    exo: &Exosystem,
    washout: f64,
) -> PropagationFit {
    assert!(!r_samples.is_empty(), "need at least one feedforward grid");
    let grid0 = &r_samples[0].1;
    let step = grid0.step();
    let horizon = grid0.t_end() - grid0.t0();
    assert!(
        (grid0.t0() - im.t0).abs() < 1e-9,
        "feedforward grids must start at the model's reference time"
    );

    let phi_f = im.transition(horizon, step);
    let phi_s = transition_grid(&exo.s, im.t0, im.t0 + horizon, step);

    // Design rows on a thinned grid: H(t_k) Φ_F(t_k, t0).
    let start = ((washout / step).ceil() as usize).min(grid0.len() - 1);
    let thin = 10;
    let mut rows: Vec<DMatrix<f64>> = Vec::new();
    let mut times: Vec<usize> = Vec::new();
    let mut k = start;
    while k < grid0.len() {
        rows.push(im.h.eval(grid0.node_time(k)) * phi_f.node(k));
        times.push(k);
        k += thin;
    }
    let t_rows = rows.len();
    let mut a = DMatrix::zeros(t_rows, im.nu);
    for (i, r) in rows.iter().enumerate() {
        a.view_mut((i, 0), (1, im.nu)).copy_from(r);
    }
    let svd = a.clone().svd(true, true);
    let sv_max = svd.singular_values.max();
    let full_rank = svd
        .singular_values
        .iter()
        .all(|&s| s > 1e-12 * sv_max.max(1e-300));

    let rho = exo.dim();
    let mut per_mu = Vec::with_capacity(r_samples.len());
    let mut max_residual = 0.0_f64;
    for (mu, r_grid) in r_samples {
        assert_eq!(r_grid.len(), grid0.len(), "feedforward grids must share the time grid");
        // Targets: R(t_k, μ) Φ_S(t_k, t0).
        let mut b = DMatrix::zeros(t_rows, rho);
        for (i, &kk) in times.iter().enumerate() {
            let row = r_grid.node(kk) * phi_s.node(kk);
            b.view_mut((i, 0), (1, rho)).copy_from(&row);
        }
        let sigma = svd.solve(&b, 1e-12 * sv_max.max(1e-300)).expect("svd solve");
        let resid_mat = &a * &sigma - &b;
        let mut residual = 0.0_f64;
        for i in 0..t_rows {
            residual = residual.max(resid_mat.row(i).norm());
        }
        max_residual = max_residual.max(residual);
        per_mu.push(MuFit { mu: mu.clone(), sigma, residual });
    }

    PropagationFit { per_mu, max_residual, full_rank }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_algebra_and_order() {
        let one = Monomial::one();
        let m1 = Monomial::var(0);
        let m2 = Monomial::var(1);
        let m12 = m1.times(&m2);
        let m11 = m1.times(&m1);
        assert_eq!(m12.to_string(), "mu1*mu2");
        assert_eq!(m11.to_string(), "mu1^2");
        assert_eq!(one.to_string(), "1");
        assert_eq!(m11.eval(&[2.0, 3.0]), 4.0);
        assert_eq!(m12.eval(&[2.0, 3.0]), 6.0);
        // Graded lex: 1 < mu1 < mu2 < mu1^2 < mu1*mu2.
        let mut v = vec![m12.clone(), m11.clone(), m2.clone(), one.clone(), m1.clone()];
        v.sort();
        let labels: Vec<String> = v.iter().map(|m| m.to_string()).collect();
        assert_eq!(labels, ["1", "mu1", "mu2", "mu1^2", "mu1*mu2"]);
    }

    #[test]
    fn block_monomial_seed_matches_kron_layout() {
        let sigma = SigmaInit::BlockMonomials {
            monomials: vec![Monomial::one(), Monomial::var(0)],
            rho: 2,
        };
        let s = sigma.at(&[0.7]);
        assert_eq!(s.nrows(), 4);
        let want = DMatrix::from_row_slice(
            4,
            2,
            &[1.0, 0.0, 0.0, 1.0, 0.7, 0.0, 0.0, 0.7],
        );
        assert_eq!(s, want);
        assert_eq!(sigma.mu_dim(), 1);
    }

    #[test]
    fn self_immersion_has_zero_residual() {
        // LTI rotation with constant readout: the model replays itself.
        let s_mat = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let exo = Exosystem::new(MatrixSignal::constant(s_mat));
        let h = MatrixSignal::constant(DMatrix::from_row_slice(1, 2, &[1.0, 0.0]));
        let im = InternalModel::new(
            exo.s.clone(),
            h.clone(),
            Provenance::Nominal,
            Some(SigmaInit::BlockMonomials { monomials: vec![Monomial::one()], rho: 2 }),
            0.0,
        );
        // R ≡ H here, so R(t)Φ_S(t,0) = HΦ_S exactly, with Σ = I.
        let r_grid = Grid::from_fn(0.0, 1e-2, 1001, |t| h.eval(t));
        let fit = verify_propagation(&im, &[(vec![], r_grid)], &exo, 0.0);
        assert!(fit.max_residual <= 1e-8, "residual {:e}", fit.max_residual);
        let sigma = &fit.per_mu[0].sigma;
        assert!((sigma - DMatrix::identity(2, 2)).norm() <= 1e-7);
    }

    #[test]
    fn marginal_probe_flags_growth() {
        let exo_rot = MatrixSignal::constant(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));
        let im = InternalModel::new(
            exo_rot,
            MatrixSignal::constant(DMatrix::from_row_slice(1, 2, &[1.0, 0.0])),
            Provenance::Nominal,
            None,
            0.0,
        );
        assert!(im.marginal_probe(20.0, 1e-2) < 1.5);

        let unstable = InternalModel::new(
            MatrixSignal::scalar(0.3),
            MatrixSignal::scalar(1.0),
            Provenance::Nominal,
            None,
            0.0,
        );
        assert!(unstable.marginal_probe(20.0, 1e-2) > 1e2);
    }
}
