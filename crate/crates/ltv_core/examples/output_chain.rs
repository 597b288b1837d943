//! Builds the output-differentiation chain and regulation stacks for a
//! scalar tracking problem with a time-varying output map, and shows the
//! resulting input-decoupled sweep matrix M(t) = −ċ(t)/c(t).
//!
//! Run with: cargo run --example output_chain

use ltv_core::instances::scalar_tracking_example;
use ltv_core::{assemble_stack, relative_degree};

fn main() {
    let (plant, exo) = scalar_tracking_example(0.125);

    let rd = relative_degree(&plant.a, &plant.b, &plant.c, 0.0, 20.0, 401, 1e-9)
        .expect("uniform relative degree");
    println!("relative degree r = {}, min gain on grid = {:.4}", rd.r, rd.phi_b);

    let st = assemble_stack(&plant, &exo, rd.r);
    println!("\n  t      M(t)      −ċ/c      b(t)");
    for k in 0..8 {
        let t = k as f64 * 0.9;
        let c = t.sin() + 2.125;
        println!(
            "{t:5.2} {m:9.5} {expect:9.5} {b:9.5}",
            m = st.m.eval_scalar(t),
            expect = -t.cos() / c,
            b = st.b.eval_scalar(t),
        );
    }
}
