//! Cross-check the swept steady state of a random time-invariant plant
//! against the direct Sylvester solution of its lower block.
//!
//! Run with: cargo run -p regulator --example sylvester_oracle

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ltv_core::instances::random_lti_plant;
use regulator::{solve_regulator, sylvester_lti_oracle, SolveOptions};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (n, r, rho) = (4, 2, 2);
    let (plant, exo) = random_lti_plant(&mut rng, n, r, rho);

    let opts = SolveOptions {
        horizon: 60.0,
        washout: Some(25.0),
        ..SolveOptions::default()
    };
    let sol = solve_regulator(&plant, &exo, r, &opts).expect("solve");

    let nl = n - r;
    let a0 = plant.a.eval(0.0);
    let eta: DMatrix<f64> = a0.view((r, r), (nl, nl)).into();
    let beta: DMatrix<f64> = a0.view((r, 0), (nl, 1)).into();
    let p_l: DMatrix<f64> = plant.p.eval(0.0).view((r, 0), (nl, rho)).into();
    let u = p_l - beta * plant.q.eval(0.0);
    let x = sylvester_lti_oracle(&eta, &exo.s.eval(0.0), &u).expect("oracle");

    let swept: DMatrix<f64> = sol.pi.node(sol.pi.len() - 1).view((r, 0), (nl, rho)).into();
    println!("direct Sylvester solution of the lower block:");
    println!("{x:.8}");
    println!("swept steady state after washout:");
    println!("{swept:.8}");
    println!("difference: {:.3e}", (swept - &x).norm());
}
