//! Integration of the regulator equations over a horizon.

use std::io::Write as IoWrite;

use nalgebra::DMatrix;

use ltv_core::{
    assemble_stack, stability_envelope, washout_time, Exosystem, Grid, MatrixSignal,
    PlantInstance, RegStack,
};

use crate::RegulatorError;

/// Hard divergence guard while sweeping the equations forward.
const DIVERGENCE: f64 = 1e12;
/// Tolerance on the algebraic (output) regulator equation after washout.
const RE2_TOL: f64 = 1e-3;
/// Rank cut for the least-squares initial value, relative to σ_max.
const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMethod {
    /// Decide from the plant structure: use the normal-form fast path when
    /// the state is already an output chain over zero dynamics.
    Auto,
    NormalForm,
    Sweep,
}

#[derive(Clone, Debug)]
pub enum InitRule {
    /// Chain rows from the stacks, zero-dynamics block started at zero
    /// (its discrepancy decays at the zero-dynamics rate and is absorbed
    /// by the washout). Falls back to least squares on the sweep path.
    ZeroLower,
    /// Minimum-norm least-squares solution of the chain equations at t0.
    LeastSquares,
    /// Explicit initial mapping.
    Given(DMatrix<f64>),
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub t0: f64,
    pub horizon: f64,
    pub step: f64,
    /// Settling interval excluded from steady-state reads; measured from
    /// the stable part's decay when absent.
    pub washout: Option<f64>,
    pub method: SolveMethod,
    pub init: InitRule,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            t0: 0.0,
            horizon: 50.0,
            step: 1e-3,
            washout: None,
            method: SolveMethod::Auto,
            init: InitRule::ZeroLower,
        }
    }
}

/// A solved regulator problem: the steady mapping Π, the feedforward row
/// R, their time grids, and post-washout residuals of both equations.
#[derive(Clone, Debug)]
pub struct RegulatorSolution {
    pub pi: Grid,
    pub r_row: Grid,
    pub pi_dot: Grid,
    pub pi_init: DMatrix<f64>,
    pub residual_re1: f64,
    pub residual_re2: f64,
    pub washout: f64,
    pub used_normal_form: bool,
    /// sup ‖Π‖ stayed below 1e6 × (1 + ‖Π(t0)‖) — a boundedness
    /// diagnostic, not a proof.
    pub bounded: bool,
}

impl RegulatorSolution {
    /// First grid index at or after the washout boundary.
    pub fn washout_index(&self) -> usize {
        let i = ((self.washout) / self.pi.step()).ceil() as usize;
        i.min(self.pi.len() - 1)
    }

    /// Write `t, Pi_11.., R_1..` rows, down-sampled by 10 for persistence.
    pub fn write_csv<W: IoWrite>(&self, w: &mut W) -> std::io::Result<()> {
        let (n, rho) = self.pi.shape();
        let mut header = String::from("t");
        for i in 1..=n {
            for j in 1..=rho {
                header.push_str(&format!(",Pi_{i}{j}"));
            }
        }
        for j in 1..=rho {
            header.push_str(&format!(",R_{j}"));
        }
        writeln!(w, "{header}")?;
        let pi = self.pi.downsample(10);
        let r = self.r_row.downsample(10);
        for k in 0..pi.len() {
            let mut line = format!("{:.6}", pi.node_time(k));
            let pv = pi.node(k);
            for i in 0..n {
                for j in 0..rho {
                    line.push_str(&format!(",{:.12e}", pv[(i, j)]));
                }
            }
            let rv = r.node(k);
            for j in 0..rho {
                line.push_str(&format!(",{:.12e}", rv[(0, j)]));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    /// JSON sidecar describing the grids and residuals.
    pub fn meta_json(&self) -> String {
        let (n, rho) = self.pi.shape();
        format!(
            concat!(
                "{{\"t0\":{},\"step\":{},\"samples\":{},\"washout\":{},",
                "\"residual_re1\":{:e},\"residual_re2\":{:e},",
                "\"n\":{},\"rho\":{},\"bounded\":{},\"method\":\"{}\"}}"
            ),
            self.pi.t0(),
            self.pi.step(),
            self.pi.len(),
            self.washout,
            self.residual_re1,
            self.residual_re2,
            n,
            rho,
            self.bounded,
            if self.used_normal_form { "normal_form" } else { "sweep" },
        )
    }
}

/// Minimum-norm least-squares solution of the chain equations at `t0`:
/// `𝒪_A(t0) Π(t0) = −(𝒪_S + 𝒫)(t0)`.
pub fn solve_initial_value(stack: &RegStack, t0: f64) -> Result<DMatrix<f64>, RegulatorError> {
    let oa = stack.o_a.eval(t0);
    let rhs = -(stack.o_s.eval(t0) + stack.p_stack.eval(t0));
    let svd = oa.clone().svd(true, true);
    let pi0 = svd
        .solve(&rhs, RANK_TOL * svd.singular_values.max())
        .expect("svd solve");
    let defect = (&oa * &pi0 - &rhs).norm();
    if defect > 1e-8 * (1.0 + rhs.norm()) {
        return Err(RegulatorError::InconsistentInitialValue { defect });
    }
    Ok(pi0)
}

/// Solve the regulator equations for a plant of relative degree `r`.
pub fn solve_regulator(
    plant: &PlantInstance,
    exo: &Exosystem,
    r: usize,
    opts: &SolveOptions,
) -> Result<RegulatorSolution, RegulatorError> {
    let stack = assemble_stack(plant, exo, r);
    let use_nf = match opts.method {
        SolveMethod::NormalForm => true,
        SolveMethod::Sweep => false,
        SolveMethod::Auto => is_normal_form(plant, r, opts),
    };

    let (pi, pi_dot) = if use_nf {
        solve_normal_form(plant, exo, r, &stack, opts)?
    } else {
        solve_sweep(exo, &stack, opts)?
    };

    // Feedforward row per node: R = −b⁻¹ (𝒪'_A Π + 𝒪'_S + 𝒫').
    let r_row = pi.map(|t, pv| {
        let oap = stack.o_a_prime.eval(t);
        let forcing = stack.o_s_prime.eval(t) + stack.p_prime.eval(t);
        -(oap * pv + forcing) / stack.b.eval_scalar(t)
    });

    let washout = opts.washout.unwrap_or_else(|| {
        let block = if use_nf {
            lower_block_signal(&plant.a, r)
        } else {
            stack.m.clone()
        };
        if block.rows() == 0 {
            // Full-chain plant: no transient part at all.
            return 0.0;
        }
        let env = stability_envelope(&block, opts.t0, opts.horizon.min(30.0), 1e-2);
        washout_time(env.phi2).min(opts.horizon / 2.0)
    });

    // Residuals of both equations on the post-washout grid.
    let start = ((washout / pi.step()).ceil() as usize).min(pi.len() - 1);
    let mut re1 = 0.0_f64;
    let mut re2 = 0.0_f64;
    for k in start..pi.len() {
        let t = pi.node_time(k);
        let pv = pi.node(k);
        let rv = r_row.node(k);
        let lhs = pi_dot.node(k) + pv * exo.s.eval(t);
        let rhs = plant.a.eval(t) * pv + plant.b.eval(t) * rv + plant.p.eval(t);
        re1 = re1.max((lhs - rhs).norm());
        re2 = re2.max((plant.c.eval(t) * pv + plant.q.eval(t)).norm());
    }
    if re2 > RE2_TOL {
        return Err(RegulatorError::AlgebraicResidual {
            residual: re2,
            tol: RE2_TOL,
        });
    }

    let pi_init = pi.node(0).clone();
    let bounded = pi.sup_norm() <= 1e6 * (1.0 + pi_init.norm());
    Ok(RegulatorSolution {
        pi,
        r_row,
        pi_dot,
        pi_init,
        residual_re1: re1,
        residual_re2: re2,
        washout,
        used_normal_form: use_nf,
        bounded,
    })
}

/// Recompute the sup-norm residuals of both regulator equations over the
/// post-washout part of a solution grid, against the given plant and
/// exosystem.  Pure evaluation; useful for auditing a stored solution.
pub fn residuals(
    sol: &RegulatorSolution,
    plant: &PlantInstance,
    exo: &Exosystem,
) -> (f64, f64) {
    let mut re1 = 0.0_f64;
    let mut re2 = 0.0_f64;
    for k in sol.washout_index()..sol.pi.len() {
        let t = sol.pi.node_time(k);
        let pv = sol.pi.node(k);
        let rv = sol.r_row.node(k);
        let lhs = sol.pi_dot.node(k) + pv * exo.s.eval(t);
        let rhs = plant.a.eval(t) * pv + plant.b.eval(t) * rv + plant.p.eval(t);
        re1 = re1.max((lhs - rhs).norm());
        re2 = re2.max((plant.c.eval(t) * pv + plant.q.eval(t)).norm());
    }
    (re1, re2)
}

/// Structural test: chain rows shift, the input enters only at the end of
/// the chain, the output is the first coordinate, and the zero dynamics
/// are fed by the first coordinate alone.
fn is_normal_form(plant: &PlantInstance, r: usize, opts: &SolveOptions) -> bool {
    let n = plant.n();
    if r > n {
        return false;
    }
    let tol = 1e-11;
    for k in 0..=100 {
        let t = opts.t0 + opts.horizon * k as f64 / 100.0;
        let a = plant.a.eval(t);
        let b = plant.b.eval(t);
        let c = plant.c.eval(t);
        for j in 0..n {
            let want = if j == 0 { 1.0 } else { 0.0 };
            if (c[(0, j)] - want).abs() > tol {
                return false;
            }
        }
        for i in 0..r.saturating_sub(1) {
            for j in 0..n {
                let want = if j == i + 1 { 1.0 } else { 0.0 };
                if (a[(i, j)] - want).abs() > tol {
                    return false;
                }
            }
            if b[(i, 0)].abs() > tol {
                return false;
            }
        }
        for i in r..n {
            if b[(i, 0)].abs() > tol {
                return false;
            }
            for j in 1..r {
                if a[(i, j)].abs() > tol {
                    return false;
                }
            }
        }
    }
    true
}

/// The zero-dynamics block of a normal-form plant as a signal (0×0 when
/// the chain fills the whole state).
fn lower_block_signal(a: &MatrixSignal, r: usize) -> MatrixSignal {
    let n = a.rows();
    let nl = n - r;
    let mut left = DMatrix::zeros(nl, n);
    let mut right = DMatrix::zeros(n, nl);
    for i in 0..nl {
        left[(i, r + i)] = 1.0;
        right[(r + i, i)] = 1.0;
    }
    &(&MatrixSignal::constant(left) * a) * &MatrixSignal::constant(right)
}

struct NfCoeffs {
    eta: DMatrix<f64>,
    s: DMatrix<f64>,
    force: DMatrix<f64>,
}

fn solve_normal_form(
    plant: &PlantInstance,
    exo: &Exosystem,
    r: usize,
    stack: &RegStack,
    opts: &SolveOptions,
) -> Result<(Grid, Grid), RegulatorError> {
    let n = plant.n();
    let rho = plant.rho();
    let nl = n - r;
    let eta_sig = lower_block_signal(&plant.a, r);

    // β column (zero-dynamics drive from the first chain coordinate) and
    // the lower disturbance rows.
    let mut sel = DMatrix::zeros(nl, n);
    for i in 0..nl {
        sel[(i, r + i)] = 1.0;
    }
    let sel = MatrixSignal::constant(sel);
    let e1 = MatrixSignal::constant(DMatrix::from_fn(n, 1, |i, _| if i == 0 { 1.0 } else { 0.0 }));
    let beta_sig = &(&sel * &plant.a) * &e1;
    let p_l_sig = &sel * &plant.p;

    // Chain rows of Π are algebraic: Π_u = −(𝒪_S + 𝒫).
    let pi_u = -(&stack.o_s + &stack.p_stack);
    let pi_u_dot = pi_u.deriv();

    let coeffs = |t: f64| NfCoeffs {
        eta: eta_sig.eval(t),
        s: exo.s.eval(t),
        force: p_l_sig.eval(t) - beta_sig.eval(t) * plant.q.eval(t),
    };
    let rhs = |c: &NfCoeffs, y: &DMatrix<f64>| &c.eta * y - y * &c.s + &c.force;

    let mut pl: DMatrix<f64> = match &opts.init {
        InitRule::ZeroLower => DMatrix::zeros(nl, rho),
        InitRule::LeastSquares => solve_initial_value(stack, opts.t0)?.rows(r, nl).into(),
        InitRule::Given(pi0) => pi0.rows(r, nl).into(),
    };

    let len = (opts.horizon / opts.step).round() as usize + 1;
    let h = opts.step;
    let mut pi_vals = Vec::with_capacity(len);
    let mut dot_vals = Vec::with_capacity(len);
    let mut push = |t: f64, pl: &DMatrix<f64>, c0: &NfCoeffs| {
        let mut pi = DMatrix::zeros(n, rho);
        pi.view_mut((0, 0), (r, rho)).copy_from(&pi_u.eval(t));
        if nl > 0 {
            pi.view_mut((r, 0), (nl, rho)).copy_from(pl);
        }
        let mut dot = DMatrix::zeros(n, rho);
        dot.view_mut((0, 0), (r, rho)).copy_from(&pi_u_dot.eval(t));
        if nl > 0 {
            dot.view_mut((r, 0), (nl, rho)).copy_from(&rhs(c0, pl));
        }
        pi_vals.push(pi);
        dot_vals.push(dot);
    };

    let mut c_here = coeffs(opts.t0);
    for k in 0..len {
        let t = opts.t0 + h * k as f64;
        if !pl.iter().all(|v| v.is_finite()) || pl.norm() > DIVERGENCE {
            return Err(RegulatorError::UnboundedSolutionCandidate { t, norm: pl.norm() });
        }
        push(t, &pl, &c_here);
        if k + 1 == len {
            break;
        }
        let c_mid = coeffs(t + 0.5 * h);
        let c_next = coeffs(t + h);
        let k1 = rhs(&c_here, &pl);
        let k2 = rhs(&c_mid, &(&pl + 0.5 * h * &k1));
        let k3 = rhs(&c_mid, &(&pl + 0.5 * h * &k2));
        let k4 = rhs(&c_next, &(&pl + h * &k3));
        pl += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        c_here = c_next;
    }

    Ok((
        Grid::new(opts.t0, h, pi_vals),
        Grid::new(opts.t0, h, dot_vals),
    ))
}

struct SweepCoeffs {
    m: DMatrix<f64>,
    n: DMatrix<f64>,
    s: DMatrix<f64>,
}

fn solve_sweep(
    exo: &Exosystem,
    stack: &RegStack,
    opts: &SolveOptions,
) -> Result<(Grid, Grid), RegulatorError> {
    let pi0 = match &opts.init {
        InitRule::Given(p) => p.clone(),
        _ => solve_initial_value(stack, opts.t0)?,
    };
    let n = pi0.nrows();
    let rho = pi0.ncols();

    let coeffs = |t: f64| SweepCoeffs {
        m: stack.m.eval(t),
        n: stack.n.eval(t),
        s: exo.s.eval(t),
    };
    // Stacked state [Ψ; X] with Ψ̇ = MΨ + NX, Ẋ = SX.
    let rhs = |c: &SweepCoeffs, y: &DMatrix<f64>| {
        let psi = y.rows(0, n);
        let x = y.rows(n, rho);
        let mut out = DMatrix::zeros(n + rho, rho);
        out.view_mut((0, 0), (n, rho))
            .copy_from(&(&c.m * psi + &c.n * x));
        out.view_mut((n, 0), (rho, rho)).copy_from(&(&c.s * x));
        out
    };

    let mut y = DMatrix::zeros(n + rho, rho);
    y.view_mut((0, 0), (n, rho)).copy_from(&pi0);
    y.view_mut((n, 0), (rho, rho))
        .copy_from(&DMatrix::identity(rho, rho));

    let len = (opts.horizon / opts.step).round() as usize + 1;
    let h = opts.step;
    let mut pi_vals = Vec::with_capacity(len);
    let mut dot_vals = Vec::with_capacity(len);

    let mut c_here = coeffs(opts.t0);
    for k in 0..len {
        let t = opts.t0 + h * k as f64;
        if !y.iter().all(|v| v.is_finite()) || y.norm() > DIVERGENCE {
            return Err(RegulatorError::UnboundedSolutionCandidate { t, norm: y.norm() });
        }
        // Recover Π = Ψ X⁻¹ and Π̇ = MΠ + N − ΠS at the node.
        let psi: DMatrix<f64> = y.rows(0, n).into();
        let x: DMatrix<f64> = y.rows(n, rho).into();
        let xinv = x
            .try_inverse()
            .ok_or(RegulatorError::UnboundedSolutionCandidate { t, norm: f64::INFINITY })?;
        let pi = psi * xinv;
        let dot = &c_here.m * &pi + &c_here.n - &pi * &c_here.s;
        pi_vals.push(pi);
        dot_vals.push(dot);
        if k + 1 == len {
            break;
        }
        let c_mid = coeffs(t + 0.5 * h);
        let c_next = coeffs(t + h);
        let k1 = rhs(&c_here, &y);
        let k2 = rhs(&c_mid, &(&y + 0.5 * h * &k1));
        let k3 = rhs(&c_mid, &(&y + 0.5 * h * &k2));
        let k4 = rhs(&c_next, &(&y + h * &k3));
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        c_here = c_next;
    }

    Ok((
        Grid::new(opts.t0, h, pi_vals),
        Grid::new(opts.t0, h, dot_vals),
    ))
}
