//! Start the gain tuner from a deliberately under-powered observer gain
//! and watch it escalate until the unforced closed loop decays at every
//! corner of the parameter box.
//!
//! Run with: cargo run -p stabilizer --example autotune_gains

use internal_model::{
    canonical_realization, interaction_robust_im, CanonicalOptions, RobustImOptions,
};
use ltv_core::instances::interaction_example;
use ltv_core::MatrixSignal;
use nalgebra::DMatrix;
use stabilizer::{autotune_gains, build_controller, HighGainParams, UasProbe};

fn main() {
    let (plant, exo) = interaction_example();
    let (im, _) =
        interaction_robust_im(&plant, &exo, 1, &RobustImOptions::default()).expect("model");
    let real =
        canonical_realization(&im, 4.0, &CanonicalOptions { step: 5e-4, ..Default::default() })
            .expect("realization");

    let factory = |params: &HighGainParams, mu: &[f64]| {
        let ctrl = build_controller(&real, params)?;
        let inst = plant.at(mu);
        Ok(MatrixSignal::block(vec![
            vec![inst.a.clone(), inst.b.clone() * ctrl.h_c.clone()],
            vec![ctrl.g_c.clone() * inst.c.clone(), ctrl.f_c.clone()],
        ]))
    };
    let corners = vec![vec![0.7], vec![-0.7]];

    // g = 2.5 destabilizes this loop; the tuner doubles k first, then g,
    // until the decay probe is satisfied at the origin and both corners.
    let start = HighGainParams::new(20.0, 2.5, vec![5.0], DMatrix::zeros(1, 0), 1.0)
        .expect("start");
    println!("starting from k = {}, g = {}", start.k, start.g);
    match autotune_gains(&factory, &start, &corners, 8, &UasProbe::default()) {
        Ok((tuned, trail)) => {
            println!("\n  step    k      g     worst exponent   worst shrink   pass");
            for (i, s) in trail.iter().enumerate() {
                println!(
                    "  {i:>4} {:>6} {:>6}   {:+.4e}     {:.3e}     {}",
                    s.k, s.g, s.worst_exponent, s.worst_shrink, s.pass
                );
            }
            println!("\naccepted gains: k = {}, g = {}", tuned.k, tuned.g);
        }
        Err(e) => println!("tuning failed: {e}"),
    }

    // The known-good pair is accepted as-is.
    let good = HighGainParams::new(20.0, 200.0, vec![5.0], DMatrix::zeros(1, 0), 1.0)
        .expect("params");
    let (tuned, trail) =
        autotune_gains(&factory, &good, &corners, 4, &UasProbe::default()).expect("tune");
    println!(
        "\n(k, g) = (20, 200): accepted in {} step(s) with worst exponent {:+.4}",
        trail.len(),
        trail[0].worst_exponent
    );
    assert_eq!((tuned.k, tuned.g), (20.0, 200.0));
}
