//! Solve the regulator equations for the harmonic worked example and print
//! the steady mapping together with the feedforward row.
//!
//! Run with: cargo run -p regulator --example solve_harmonic

use ltv_core::instances::interaction_example;
use regulator::{solve_regulator, SolveOptions};

fn main() {
    let (uplant, exo) = interaction_example();
    let plant = uplant.nominal();
    let opts = SolveOptions {
        horizon: 40.0,
        washout: Some(16.0),
        ..SolveOptions::default()
    };
    let sol = solve_regulator(&plant, &exo, 1, &opts).expect("solve");

    println!(
        "method: {}   washout: {:.1}s   residuals: re1 {:.2e}, re2 {:.2e}",
        if sol.used_normal_form { "chain fast path" } else { "sweep" },
        sol.washout,
        sol.residual_re1,
        sol.residual_re2,
    );

    let k_end = sol.pi.len() - 1;
    println!("\nPi at t = {:.1}:", sol.pi.node_time(k_end));
    println!("{:.6}", sol.pi.node(k_end));

    println!("feedforward row samples (expected [-0.2 (cos 2t + cos sqrt(2) t), 0]):");
    for t in [20.0, 25.0, 30.0, 35.0, 40.0] {
        let rv = sol.r_row.eval(t);
        let want = -0.2 * ((2.0 * t).cos() + (2.0_f64.sqrt() * t).cos());
        println!(
            "  t = {t:>4.1}   R = [{:+.6}, {:+.6}]   closed form {want:+.6}",
            rv[(0, 0)],
            rv[(0, 1)],
        );
    }
}
