//! Build a truncated-series internal model for a plant whose uncertainty
//! enters the state matrix itself, report the guaranteed truncation bound,
//! and show the smallness screening rejecting a parameter box that is too
//! large for the bound to hold.
//!
//! Run with: cargo run -p internal_model --example approximate_model

use internal_model::{plant_approx_im, verify_propagation, ApproxImOptions, ImError};
use ltv_core::instances::plant_example;
use regulator::{solve_regulator, SolveOptions};

fn main() {
    let (plant, exo) = plant_example();
    let opts = ApproxImOptions::default();

    // First order in both the gain series and the zero-dynamics series,
    // on the parameter box |mu_i| <= 0.44.
    let (im, report) = plant_approx_im(&plant, &exo, 0.44, 1, 1, &opts).expect("build");

    println!("retained monomials ({} rows kept, {} dropped):", report.term_count, report.dropped);
    for label in &report.labels {
        println!("  {label}");
    }
    println!("model dimension nu = {}", im.nu);
    println!(
        "\nenvelope fit: phi1 = {:.3}, phi2 = {:.3}, phi_b = {:.3}, sup|Phi| = {:.3}",
        report.phi1, report.phi2, report.phi_b, report.phi_sup
    );
    println!(
        "per-box gains: g1 = {:.3e} ({} active channels), g2 = {:.3e} ({} active)",
        report.g1, report.n_b, report.g2, report.n_eta
    );
    println!("guaranteed feedforward truncation error on the box: {:.4e}", report.bound_r);

    // Measure the actual error at a corner of the box and compare.
    let mu = [0.42, 0.42];
    let direct =
        solve_regulator(&plant.at(&mu), &exo, 1, &SolveOptions::default()).expect("direct");
    let fit = verify_propagation(&im, &[(mu.to_vec(), direct.r_row)], &exo, direct.washout);
    println!(
        "measured propagation residual at mu = ({}, {}): {:.4e}",
        mu[0], mu[1], fit.max_residual
    );

    // The bound is only valid while the box satisfies the smallness
    // conditions; ask for an impossible box and show the refusal.
    match plant_approx_im(&plant, &exo, 2.0, 1, 1, &opts) {
        Err(e @ ImError::SmallnessViolated { .. }) => {
            println!("\nbox radius 2.0 refused as expected:\n  {e}")
        }
        other => println!("\nunexpected outcome for an oversized box: {other:?}"),
    }
}
