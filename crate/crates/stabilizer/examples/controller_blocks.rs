//! Assemble the high-gain controller for the disturbance-uncertain
//! harmonic example and walk through its block structure.
//!
//! Run with: cargo run -p stabilizer --example controller_blocks

use internal_model::{
    canonical_realization, interaction_robust_im, CanonicalOptions, RobustImOptions,
};
use ltv_core::instances::interaction_example;
use nalgebra::DMatrix;
use stabilizer::{build_controller, gain_sign, HighGainParams};

fn main() {
    let (plant, exo) = interaction_example();
    let (im, _) =
        interaction_robust_im(&plant, &exo, 1, &RobustImOptions::default()).expect("model");
    let real =
        canonical_realization(&im, 4.0, &CanonicalOptions { step: 5e-4, ..Default::default() })
            .expect("realization");

    let sign = gain_sign(&plant.at(&[0.0]).b, 0.0, 50.0).expect("sign");
    let params = HighGainParams::new(20.0, 200.0, vec![5.0], DMatrix::zeros(1, 0), sign)
        .expect("params");
    println!("gain bundle: {}", params.manifest_json());

    let ctrl = build_controller(&real, &params).expect("assemble");
    println!("controller partition: {}", ctrl.manifest_json());

    let t = 12.3;
    let fv = ctrl.f_c.eval(t);
    let gv = ctrl.g_c.eval(t);
    let hv = ctrl.h_c.eval(t);
    println!("\nF_c({t}) =\n{fv:.4}");
    println!("G_c({t})^T = {:?}", gv.transpose().as_slice());
    println!("H_c({t}) = {:?}", hv.as_slice());

    // The zero mask of the partition: the fast block is driven only by
    // the error, and the internal-model block never feeds back into it.
    let mask_holds = (1..ctrl.nu()).all(|j| fv[(0, j)] == 0.0 && gv[(j, 0)] == 0.0);
    println!("\nfast-block isolation mask exactly zero: {mask_holds}");

    // The ξ2 diagonal block is the composite generator of the realization.
    let composite = real.f_im.eval(t) + real.g_im.eval(t) * real.h_im.eval(t);
    let defect = (fv.view((1, 1), (4, 4)) - composite).amax();
    println!("xi2 block matches F_im + G_im H_im: defect {defect:.2e}");
}
