//! Build the exact parameter-robust internal model for a plant whose
//! uncertainty sits only in the disturbance coupling row, then check that
//! one fixed (F, H) pair replays the ideal feedforward for every value of
//! the parameter at once.
//!
//! Run with: cargo run -p internal_model --example robust_model

use internal_model::{interaction_robust_im, verify_propagation, RobustImOptions};
use ltv_core::instances::interaction_example;
use regulator::{solve_regulator, SolveOptions};

fn main() {
    let (plant, exo) = interaction_example();
    let (im, subs) =
        interaction_robust_im(&plant, &exo, 1, &RobustImOptions::default()).expect("build");

    println!(
        "model dimension nu = {} = (1 + {} channels) x rho = {}",
        im.nu,
        plant.mu_dim,
        exo.dim()
    );
    for (i, sub) in subs.iter().enumerate() {
        println!(
            "  sub-problem {i}: re1 residual {:.2e}, re2 residual {:.2e}",
            sub.residual_re1, sub.residual_re2
        );
    }

    // The model was assembled from per-channel solves; confront it with
    // regulator solutions at parameter values it never saw.  The fitted
    // initial condition should be the block stack [I; mu * I].
    println!("\npropagation fit against directly solved feedforward rows:");
    let rho = exo.dim();
    for &mu in &[-0.8, 0.0, 0.35, 0.7] {
        let direct = solve_regulator(&plant.at(&[mu]), &exo, 1, &SolveOptions::default())
            .expect("direct solve");
        let fit = verify_propagation(&im, &[(vec![mu], direct.r_row.clone())], &exo, direct.washout);
        let sigma = &fit.per_mu[0].sigma;
        let top = sigma.view((0, 0), (rho, rho)) - nalgebra::DMatrix::identity(rho, rho);
        let bot = sigma.view((rho, 0), (rho, rho)) - mu * nalgebra::DMatrix::identity(rho, rho);
        println!(
            "  mu = {mu:>5.2}   residual {:.3e}   |Sigma_top - I| {:.1e}   |Sigma_bot - mu I| {:.1e}",
            fit.max_residual,
            top.amax(),
            bot.amax(),
        );
    }

    // The fitted initial condition has the predicted block structure
    // [I; mu * I]: the top block replays the nominal row, the bottom block
    // scales the channel row by the parameter.
    let direct = solve_regulator(&plant.at(&[0.7]), &exo, 1, &SolveOptions::default()).unwrap();
    let fit = verify_propagation(&im, &[(vec![0.7], direct.r_row)], &exo, direct.washout);
    println!("\nfitted Sigma(t0, mu = 0.7):\n{:.5}", fit.per_mu[0].sigma);
}
