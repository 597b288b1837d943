//! End-to-end checks of the controller assembly and gain tuning around
//! the worked harmonic examples.

use internal_model::{
    canonical_realization, interaction_robust_im, plant_approx_im, verify_propagation,
    ApproxImOptions, CanonicalOptions, CanonicalRealization, RobustImOptions,
};
use ltv_core::instances::{interaction_example, plant_example};
use ltv_core::{Exosystem, MatrixSignal, UncertainPlant};
use nalgebra::DMatrix;
use regulator::{solve_regulator, SolveOptions};
use stabilizer::{
    autotune_gains, build_controller, decay_probe, gain_sign, read_controller_csv,
    Controller, HighGainParams, StabilizerError, UasProbe,
};

/// The disturbance-uncertain example with its stabilized realization,
/// synthesized on the half-millisecond grid so millisecond integrations
/// hit nodes at every stage.
fn interaction_setup() -> (UncertainPlant, Exosystem, CanonicalRealization) {
    let (plant, exo) = interaction_example();
    let (im, _) = interaction_robust_im(&plant, &exo, 1, &RobustImOptions::default()).unwrap();
    let real =
        canonical_realization(&im, 4.0, &CanonicalOptions { step: 5e-4, ..Default::default() })
            .unwrap();
    (plant, exo, real)
}

fn params_iu(k: f64, g: f64, sign: f64) -> HighGainParams {
    HighGainParams::new(k, g, vec![5.0], DMatrix::zeros(1, 0), sign).unwrap()
}

/// Unforced closed loop (x, ξ) for one plant instance and controller.
fn closed_loop(plant: &UncertainPlant, mu: &[f64], ctrl: &Controller) -> MatrixSignal {
    let inst = plant.at(mu);
    MatrixSignal::block(vec![
        vec![inst.a.clone(), inst.b.clone() * ctrl.h_c.clone()],
        vec![ctrl.g_c.clone() * inst.c.clone(), ctrl.f_c.clone()],
    ])
}

#[test]
fn observer_block_values_follow_the_gains() {
    let (plant, _exo, real) = interaction_setup();
    let sign = gain_sign(&plant.at(&[0.0]).b, 0.0, 50.0).unwrap();
    assert_eq!(sign, 1.0);

    // d_0 = 5, g = 200, k = 20 for the disturbance-uncertain example.
    let ctrl = build_controller(&real, &params_iu(20.0, 200.0, sign)).unwrap();
    assert_eq!((ctrl.r, ctrl.l), (1, 4));
    for &t in &[0.0, 7.25, 31.4] {
        let fv = ctrl.f_c.eval(t);
        let gv = ctrl.g_c.eval(t);
        let hv = ctrl.h_c.eval(t);
        assert_eq!(fv[(0, 0)], -1000.0);
        assert_eq!(gv[(0, 0)], 1000.0);
        assert_eq!(hv[(0, 0)], -20.0);
        // Zero mask of the partition: the fast block never reads ξ2.
        for j in 1..5 {
            assert_eq!(fv[(0, j)], 0.0);
            assert_eq!(gv[(j, 0)], 0.0);
        }
        // Coupling column is −k·G_im; the ξ2 block is the composite
        // generator; the ξ2 output row is the rebased readout.
        let g_im = real.g_im.eval(t);
        let composite = real.f_im.eval(t) + &g_im * real.h_im.eval(t);
        let h_im = real.h_im.eval(t);
        for i in 0..4 {
            assert_eq!(fv[(1 + i, 0)], -20.0 * g_im[(i, 0)]);
            assert_eq!(hv[(0, 1 + i)], h_im[(0, i)]);
            for j in 0..4 {
                assert!((fv[(1 + i, 1 + j)] - composite[(i, j)]).abs() < 1e-14);
            }
        }
    }
}

#[test]
fn series_realization_takes_the_higher_gain_pair() {
    // The plant-uncertain example runs the truncated series model through
    // the same assembly with k = 45, g = 300.  The series stack needs the
    // gentler decay rate 0.4: at alpha = 4 its transformation conditioning
    // exceeds the refusal ceiling.
    let (plant, exo) = plant_example();
    let (im, report) =
        plant_approx_im(&plant, &exo, 0.44, 1, 1, &ApproxImOptions::default()).unwrap();
    assert_eq!(report.term_count, 4);
    let real =
        canonical_realization(&im, 0.4, &CanonicalOptions { step: 5e-4, ..Default::default() })
            .unwrap();
    assert!(real.cond_max < 1e6, "cond {}", real.cond_max);

    let sign = gain_sign(&plant.at(&[0.0, 0.0]).b, 0.0, 50.0).unwrap();
    let ctrl = build_controller(&real, &params_iu(45.0, 300.0, sign)).unwrap();
    assert_eq!((ctrl.r, ctrl.l), (1, 8));
    let fv = ctrl.f_c.eval(3.0);
    let gv = ctrl.g_c.eval(3.0);
    assert_eq!(fv[(0, 0)], -1500.0);
    assert_eq!(gv[(0, 0)], 1500.0);
    assert_eq!(ctrl.h_c.eval(3.0)[(0, 0)], -45.0);
}

#[test]
fn steady_controller_state_replays_the_feedforward() {
    // The controller's own steady state: with zero fast states and the
    // internal-model states seeded by the fitted Σ, the controller output
    // must reproduce the ideal feedforward row along exosystem flows.
    let (plant, exo, real) = interaction_setup();
    let ctrl = build_controller(&real, &params_iu(20.0, 200.0, 1.0)).unwrap();

    let mu = 0.7;
    let direct = solve_regulator(&plant.at(&[mu]), &exo, 1, &SolveOptions::default()).unwrap();
    let (im, _) = interaction_robust_im(&plant, &exo, 1, &RobustImOptions::default()).unwrap();
    let as_im = real.as_internal_model(&im);
    let fit = verify_propagation(&as_im, &[(vec![mu], direct.r_row.clone())], &exo, direct.washout);
    let sigma2 = &fit.per_mu[0].sigma;

    // Σ_c = [0; Σ2]: the fast block is quiet at steady state because the
    // error vanishes there.
    let mut sigma_c = DMatrix::zeros(5, 2);
    sigma_c.view_mut((1, 0), (4, 2)).copy_from(sigma2);

    // Integrate dΣ_c/dt = F_c Σ_c − Σ_c S and compare H_c Σ_c with the
    // directly solved feedforward row past the washout.
    let h = 1e-3;
    let steps = 50_000usize;
    let mut worst: f64 = 0.0;
    let mut s_c = sigma_c;
    for k in 0..steps {
        let t = k as f64 * h;
        if t >= direct.washout {
            let u_row = ctrl.h_c.eval(t) * &s_c;
            worst = worst.max((u_row - direct.r_row.eval(t)).amax());
        }
        let rhs = |t: f64, m: &DMatrix<f64>| ctrl.f_c.eval(t) * m - m * exo.s.eval(t);
        let k1 = rhs(t, &s_c);
        let k2 = rhs(t + 0.5 * h, &(&s_c + 0.5 * h * &k1));
        let k3 = rhs(t + 0.5 * h, &(&s_c + 0.5 * h * &k2));
        let k4 = rhs(t + h, &(&s_c + h * &k3));
        s_c += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    assert!(worst <= 1e-5, "steady replay residual {worst}");
}

#[test]
fn known_good_gains_pass_the_probe_without_doubling() {
    let (plant, _exo, real) = interaction_setup();
    let start = params_iu(20.0, 200.0, 1.0);
    let factory = |params: &HighGainParams, mu: &[f64]| {
        let ctrl = build_controller(&real, params)?;
        Ok(closed_loop(&plant, mu, &ctrl))
    };
    let corners = vec![vec![0.7], vec![-0.7]];
    let (tuned, trail) =
        autotune_gains(factory, &start, &corners, 4, &UasProbe::default()).unwrap();
    assert_eq!(trail.len(), 1, "accepted without doubling");
    assert!(trail[0].pass);
    assert_eq!((tuned.k, tuned.g), (20.0, 200.0));
    // The decay is set by the plant's zero dynamics (pole at −1).
    assert!(
        trail[0].worst_exponent <= -0.95,
        "exponent {}",
        trail[0].worst_exponent
    );
}

#[test]
fn weak_observer_gain_degrades_then_destabilizes() {
    // Documents the high-gain regime on the disturbance-uncertain
    // example: at g = 5 the loop still decays but three times slower
    // than the zero-dynamics rate; by g = 2.5 it diverges.
    let (plant, _exo, real) = interaction_setup();
    let probe = UasProbe::default();

    let ctrl = build_controller(&real, &params_iu(20.0, 5.0, 1.0)).unwrap();
    let out = decay_probe(&closed_loop(&plant, &[0.7], &ctrl), &probe);
    assert!(out.pass, "g = 5 still decays (exponent {})", out.worst_exponent);
    assert!(out.worst_exponent >= -0.5, "degraded exponent, got {}", out.worst_exponent);

    let ctrl = build_controller(&real, &params_iu(20.0, 2.5, 1.0)).unwrap();
    let out = decay_probe(&closed_loop(&plant, &[0.7], &ctrl), &probe);
    assert!(!out.pass, "g = 2.5 must not pass");
}

#[test]
fn vanishing_control_gain_is_rejected_before_tuning() {
    let dead = MatrixSignal::zeros(2, 1);
    match gain_sign(&dead, 0.0, 50.0) {
        Err(StabilizerError::GainSignViolation { .. }) => {}
        other => panic!("expected a sign violation, got {other:?}"),
    }
}

#[test]
fn assembled_controller_survives_persistence() {
    let (_plant, _exo, real) = interaction_setup();
    let ctrl = build_controller(&real, &params_iu(20.0, 200.0, 1.0)).unwrap();
    let mut buf = Vec::new();
    ctrl.write_csv(50.0, 1e-2, &mut buf).unwrap();
    let back = read_controller_csv(&String::from_utf8(buf).unwrap(), ctrl.r, ctrl.l).unwrap();
    // Sample times built exactly as the writer builds them, so equality
    // is bit-for-bit.
    for k in [0usize, 1000, 2500, 4999] {
        let t = k as f64 * 1e-2;
        assert_eq!(ctrl.f_c.eval(t), back.f_c.eval(t));
        assert_eq!(ctrl.g_c.eval(t), back.g_c.eval(t));
        assert_eq!(ctrl.h_c.eval(t), back.h_c.eval(t));
    }
    let manifest = ctrl.manifest_json();
    assert!(manifest.contains("\"r\":1") && manifest.contains("\"l\":4"));
}
