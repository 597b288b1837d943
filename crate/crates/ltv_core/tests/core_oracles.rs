//! Frozen numerical oracles for the core primitives.

use ltv_core::instances::harmonic_exosystem;
use ltv_core::{
    assemble_stack, relative_degree, stability_envelope, transition_matrix, washout_time,
    Exosystem, MatrixSignal, PlantInstance,
};
use nalgebra::{dmatrix, DMatrix};

#[test]
fn scalar_decay_transition_value() {
    // ẋ = −x over two seconds: Φ(2,0) = e⁻² = 0.13533528323661…
    let a = MatrixSignal::scalar(-1.0);
    let phi = transition_matrix(&a, 2.0, 0.0, 1e-3);
    assert!((phi[(0, 0)] - 0.1353352832366127).abs() < 1e-8);
}

#[test]
fn harmonic_cocycle_and_step_halving() {
    let exo = harmonic_exosystem();
    let t2 = 12.0;
    let t1 = 5.5;
    let full = transition_matrix(&exo.s, t2, 0.0, 1e-3);
    let split = transition_matrix(&exo.s, t2, t1, 1e-3) * transition_matrix(&exo.s, t1, 0.0, 1e-3);
    assert!((&full - split).norm() < 1e-7);
    let halved = transition_matrix(&exo.s, t2, 0.0, 5e-4);
    assert!((full - halved).norm() < 1e-9);
}

#[test]
fn exact_derivatives_agree_with_finite_differences() {
    // A representative composite: a(t)·M + transpose/product mixing.
    let m = MatrixSignal::constant(dmatrix![0.3, -1.0; 2.0, 0.7]);
    let sig = MatrixSignal::sinusoid(1.3, 0.9, 0.2) * m.clone() + (m.t() * m).scale(0.1);
    let d = sig.deriv();
    assert!(sig.smoothness().is_none(), "closed-form tree stays exact");
    for i in 0..200 {
        let t = -2.0 + 0.05 * i as f64;
        let h = 1e-5;
        let fd = (sig.eval(t + h) - sig.eval(t - h)) / (2.0 * h);
        assert!((d.eval(t) - fd).norm() < 1e-6);
    }
}

#[test]
fn disturbance_rows_vanish_identically_on_dense_grids() {
    // First feed-through row is structurally zero: checked on ≥ 2001 points.
    let (plant, exo) = ltv_core::instances::interaction_example();
    let st = assemble_stack(&plant.nominal(), &exo, 1);
    for i in 0..=2000 {
        let t = 50.0 * i as f64 / 2000.0;
        assert!(st.p_stack.eval(t).amax() <= 1e-9);
        assert!(st.p_prime.eval(t).amax() <= 1e-9); // P ≡ 0 for this system
    }
}

#[test]
fn log_derivative_sweep_for_scalar_tracking() {
    // ẋ = u, e = c(t)x + w, ẇ = 0 gives M = −ċ/c and N ≡ 0.
    let (plant, exo) = ltv_core::instances::scalar_tracking_example(0.25);
    let st = assemble_stack(&plant, &exo, 1);
    for i in 0..500 {
        let t = 0.04 * i as f64;
        let c = t.sin() + 2.25;
        assert!((st.m.eval_scalar(t) + t.cos() / c).abs() < 1e-11);
        assert!(st.n.eval(t).amax() < 1e-12);
        assert!((st.b.eval_scalar(t) - c).abs() < 1e-12);
    }
}

#[test]
fn relative_degree_of_the_worked_plant() {
    let (plant, _) = ltv_core::instances::plant_example();
    let inst = plant.at(&[-0.25, -0.4375]);
    let rd = relative_degree(&inst.a, &inst.b, &inst.c, 0.0, 50.0, 501, 1e-9).unwrap();
    assert_eq!(rd.r, 1);
    assert!((rd.phi_b - 1.0).abs() < 1e-12);
}

#[test]
fn zero_dynamics_envelope_and_washout() {
    // The worked examples share the scalar zero-dynamics pole η₀ = −1.
    let eta = MatrixSignal::scalar(-1.0);
    let env = stability_envelope(&eta, 0.0, 30.0, 1e-3);
    assert!((env.phi2 - 1.0).abs() < 0.02);
    assert!(env.phi1 <= 1.2);
    assert_eq!(washout_time(env.phi2).round(), 10.0);
}

#[test]
fn backward_transition_matches_inverse() {
    let exo = harmonic_exosystem();
    let fwd = transition_matrix(&exo.s, 8.0, 0.0, 1e-3);
    let bwd = transition_matrix(&exo.s, 0.0, 8.0, 1e-3);
    assert!((fwd * bwd - DMatrix::identity(2, 2)).norm() < 1e-8);
}

#[test]
fn stack_feedforward_row_matches_hand_computation() {
    // For the nominal worked plant with Π = [[1, 1], [1, 0]]:
    // R = −(𝒪'_A Π + 𝒪'_S) = −0.2(cos 2t + cos √2 t) on the first entry, 0 on the second.
    let (plant, exo) = ltv_core::instances::interaction_example();
    let st = assemble_stack(&plant.nominal(), &exo, 1);
    let pi = MatrixSignal::constant(dmatrix![1.0, 1.0; 1.0, 0.0]);
    let r = st.feedforward_row(&pi);
    for i in 0..300 {
        let t = 0.11 * i as f64;
        let expect = -0.2 * ((2.0 * t).cos() + (2.0_f64.sqrt() * t).cos());
        let row = r.eval(t);
        assert!((row[(0, 0)] - expect).abs() < 1e-12, "t={t}");
        assert!(row[(0, 1)].abs() < 1e-12);
    }
}

#[test]
fn certain_plant_helper_round_trips() {
    let plant = PlantInstance::new(
        MatrixSignal::constant(dmatrix![0.0, 1.0; -1.0, -0.4]),
        MatrixSignal::constant(dmatrix![0.0; 1.0]),
        MatrixSignal::constant(dmatrix![1.0, 0.0]),
        MatrixSignal::zeros(2, 1),
        MatrixSignal::constant(dmatrix![1.0]),
    );
    let exo = Exosystem::new(MatrixSignal::zeros(1, 1));
    let st = assemble_stack(&plant, &exo, 2);
    // b = (L_A C) B = [0,1]·B = 1
    assert!((st.b.eval_scalar(0.0) - 1.0).abs() < 1e-14);
    assert_eq!(st.o_a.rows(), 2);
    assert_eq!(st.o_s.rows(), 2);
}
