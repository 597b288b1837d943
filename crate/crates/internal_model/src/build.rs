//! Exact internal-model constructions: the nominal immersion and the
//! interaction-robust block model.

use nalgebra::DMatrix;

use ltv_core::{Exosystem, Grid, MatrixSignal, PlantInstance, UncertainPlant};
use regulator::{solve_regulator, RegulatorSolution, SolveOptions};

use crate::model::{InternalModel, Monomial, Provenance, SigmaInit};
use crate::ImError;

/// The trivial immersion: the exosystem itself generates the feedforward,
/// read out by the nominal feedforward row.  F = S, H = R₀, Σ = I.
pub fn nominal_im(exo: &Exosystem, r0: &Grid, t0: f64) -> InternalModel {
    let rho = exo.dim();
    assert_eq!(r0.shape(), (1, rho), "feedforward grid must be a 1 x rho row");
    InternalModel::new(
        exo.s.clone(),
        MatrixSignal::from_grid(r0.clone()),
        Provenance::Nominal,
        Some(SigmaInit::BlockMonomials { monomials: vec![Monomial::one()], rho }),
        t0,
    )
}

/// Horizon settings shared by the exact constructions.
#[derive(Clone, Debug)]
pub struct RobustImOptions {
    pub t0: f64,
    pub horizon: f64,
    pub step: f64,
    pub washout: Option<f64>,
}

impl Default for RobustImOptions {
    fn default() -> Self {
        RobustImOptions { t0: 0.0, horizon: 50.0, step: 1e-3, washout: None }
    }
}

/// Exact robust model for uncertainty entering only the disturbance
/// coupling rows.  The regulator equations are affine in (P, Q), so each
/// channel contributes its own feedforward row R_i from a sub-problem
/// forced by that channel's matrices alone; stacking ν = ρ(N+1) copies of
/// the exosystem with H = [R₀, R₁, …, R_N] and Σ(μ) = [1; μ] ⊗ I_ρ then
/// reproduces R(·, μ) for every μ at once.
pub fn interaction_robust_im(
    plant: &UncertainPlant,
    exo: &Exosystem,
    r: usize,
    opts: &RobustImOptions,
) -> Result<(InternalModel, Vec<RegulatorSolution>), ImError> {
    for (name, m) in [("A", &plant.a), ("B", &plant.b), ("C", &plant.c)] {
        if !m.channels.is_empty() {
            return Err(ImError::UnsupportedChannel { target: name.to_string() });
        }
    }
    let rho = exo.dim();
    let n_mu = plant.mu_dim;

    let solve_opts = SolveOptions {
        t0: opts.t0,
        horizon: opts.horizon,
        step: opts.step,
        washout: opts.washout,
        ..SolveOptions::default()
    };
    let solve_forced =
        |p: MatrixSignal, q: MatrixSignal, channel: usize| -> Result<RegulatorSolution, ImError> {
            let inst = PlantInstance::new(
                plant.a.nominal.clone(),
                plant.b.nominal.clone(),
                plant.c.nominal.clone(),
                p,
                q,
            );
            solve_regulator(&inst, exo, r, &solve_opts).map_err(|e| ImError::SubSolveFailed {
                channel,
                reason: e.to_string(),
            })
        };

    // Block 0 of the model is the nominal problem; blocks then follow in
    // parameter order, forced by the channel matrices {E_Pi, E_Qi} alone
    // (the equations are affine in the forcing pair, so each block's row
    // is exactly the μ_i-coefficient of R).
    let mut solutions =
        vec![solve_forced(plant.p.nominal.clone(), plant.q.nominal.clone(), 0)?];
    for i in 0..n_mu {
        let e_p = channel_signal(&plant.p, i)
            .unwrap_or_else(|| MatrixSignal::zeros(plant.p.rows(), plant.p.cols()));
        let e_q = channel_signal(&plant.q, i)
            .unwrap_or_else(|| MatrixSignal::zeros(plant.q.rows(), plant.q.cols()));
        solutions.push(solve_forced(e_p, e_q, i + 1)?);
    }

    let h = hstack_rows(solutions.iter().map(|s| &s.r_row));
    let f = block_diag_copies(&exo.s, n_mu + 1);
    let mut monomials = vec![Monomial::one()];
    monomials.extend((0..n_mu).map(Monomial::var));
    let im = InternalModel::new(
        f,
        MatrixSignal::from_grid(h),
        Provenance::InteractionRobust,
        Some(SigmaInit::BlockMonomials { monomials, rho }),
        opts.t0,
    );
    Ok((im, solutions))
}

/// The channel signal of an uncertain matrix for a given parameter index.
pub(crate) fn channel_signal(m: &ltv_core::UncertainMatrix, idx: usize) -> Option<MatrixSignal> {
    m.channels
        .iter()
        .find(|(i, _)| *i == idx)
        .map(|(_, e)| e.clone())
}

/// Block-diagonal stack of `copies` instances of one square signal.
pub(crate) fn block_diag_copies(s: &MatrixSignal, copies: usize) -> MatrixSignal {
    let d = s.rows();
    let rows: Vec<Vec<MatrixSignal>> = (0..copies)
        .map(|i| {
            (0..copies)
                .map(|j| if i == j { s.clone() } else { MatrixSignal::zeros(d, d) })
                .collect()
        })
        .collect();
    MatrixSignal::block(rows)
}

/// Concatenate row grids sharing a time grid into one wide row grid.
pub(crate) fn hstack_rows<'a, I: Iterator<Item = &'a Grid>>(grids: I) -> Grid {
    let grids: Vec<&Grid> = grids.collect();
    assert!(!grids.is_empty());
    let len = grids[0].len();
    let widths: Vec<usize> = grids.iter().map(|g| g.shape().1).collect();
    let total: usize = widths.iter().sum();
    let values = (0..len)
        .map(|k| {
            let mut row = DMatrix::zeros(1, total);
            let mut at = 0;
            for (g, w) in grids.iter().zip(&widths) {
                assert_eq!(g.len(), len, "row grids must share the time grid");
                row.view_mut((0, at), (1, *w)).copy_from(g.node(k));
                at += w;
            }
            row
        })
        .collect();
    Grid::new(grids[0].t0(), grids[0].step(), values)
}
