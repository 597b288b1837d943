//! Demonstrates transition-matrix computation for a time-varying harmonic
//! generator and verifies the cocycle identity Φ(t2,t0) = Φ(t2,t1)Φ(t1,t0).
//!
//! Run with: cargo run --example transition_cocycle

use ltv_core::instances::harmonic_exosystem;
use ltv_core::transition_matrix;

fn main() {
    let exo = harmonic_exosystem();
    let (t0, t1, t2) = (0.0, 4.0, 10.0);
    let step = 1e-3;

    let full = transition_matrix(&exo.s, t2, t0, step);
    let late = transition_matrix(&exo.s, t2, t1, step);
    let early = transition_matrix(&exo.s, t1, t0, step);
    let composed = &late * &early;

    println!("Φ({t2}, {t0}) =\n{full:.6}");
    println!("Φ({t2}, {t1}) Φ({t1}, {t0}) =\n{composed:.6}");
    println!("cocycle defect      = {:.3e}", (&full - &composed).norm());

    let backward = transition_matrix(&exo.s, t0, t2, step);
    let round_trip = (&full * &backward - nalgebra::DMatrix::identity(2, 2)).norm();
    println!("forward·backward ≈ I: defect = {round_trip:.3e}");
}
