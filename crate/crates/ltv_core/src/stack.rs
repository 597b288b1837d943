//! Stacked output-differentiation data for regulator equation solvers.

use crate::chain::{lie_output_chain, lie_step};
use crate::signal::MatrixSignal;
use crate::system::{Exosystem, PlantInstance};

/// The chain stacks of a plant/exosystem pair at relative degree `r`.
///
/// Writing `L_A c = ċ + c·A` for differentiation of output rows along the
/// plant and `L_S q = q̇ + q·S` along the exosystem, the stacks collect the
/// coefficients of the first `r` error derivatives:
///
/// - `o_a` stacks `L_A^i C` for `i = 0..r-1`; `o_a_prime = L_A^r C`;
/// - `o_s` stacks `L_S^i Q`; `o_s_prime = L_S^r Q`;
/// - `p_stack` collects the disturbance feed-through rows
///   `𝒫_0 = 0`, `𝒫_{i+1} = L_S 𝒫_i + (L_A^i C) P`; `p_prime = 𝒫_r`;
/// - `b = (L_A^{r-1} C) B` is the high-gain coefficient;
/// - `m = A − B b⁻¹ 𝒪'_A` drives the input-decoupled sweep
///   `Ψ̇ = M Ψ + N Φ_S`, with `n = P − B b⁻¹ (𝒪'_S + 𝒫')`;
/// - `n_prime = −b⁻¹ (𝒪'_S + 𝒫')` recovers the feedforward row via
///   `R = −b⁻¹ 𝒪'_A Π + N'`.
#[derive(Clone, Debug)]
pub struct RegStack {
    pub r: usize,
    pub o_a: MatrixSignal,
    pub o_a_prime: MatrixSignal,
    pub o_s: MatrixSignal,
    pub o_s_prime: MatrixSignal,
    pub p_stack: MatrixSignal,
    pub p_prime: MatrixSignal,
    pub b: MatrixSignal,
    pub m: MatrixSignal,
    pub n: MatrixSignal,
    pub n_prime: MatrixSignal,
}

/// Assemble the chain stacks for a plant of relative degree `r`.
pub fn assemble_stack(plant: &PlantInstance, exo: &Exosystem, r: usize) -> RegStack {
    assert!(r >= 1, "relative degree must be at least one");
    let rho = exo.dim();
    assert_eq!(plant.rho(), rho, "plant and exosystem widths differ");

    // State chain: L_A^i C, i = 0..r.
    let a_chain = lie_output_chain(&plant.c, &plant.a, r);

    // Exogenous chain: L_S^i Q, i = 0..r.
    let s_chain = lie_output_chain(&plant.q, &exo.s, r);

    // Disturbance feed-through rows: 𝒫_0 = 0, 𝒫_{i+1} = L_S 𝒫_i + (L_A^i C) P.
    let mut p_rows: Vec<MatrixSignal> = Vec::with_capacity(r + 1);
    p_rows.push(MatrixSignal::zeros(1, rho));
    for i in 0..r {
        let next = lie_step(p_rows.last().unwrap(), &exo.s) + &a_chain[i] * &plant.p;
        p_rows.push(next);
    }

    let stack_rows =
        |rows: &[MatrixSignal]| MatrixSignal::block(rows.iter().map(|r| vec![r.clone()]).collect());

    let o_a = stack_rows(&a_chain[0..r]);
    let o_a_prime = a_chain[r].clone();
    let o_s = stack_rows(&s_chain[0..r]);
    let o_s_prime = s_chain[r].clone();
    let p_stack = stack_rows(&p_rows[0..r]);
    let p_prime = p_rows[r].clone();

    let b = &a_chain[r - 1] * &plant.b;
    let b_inv = MatrixSignal::recip(&b);
    let forcing = &o_s_prime + &p_prime;
    let m = &plant.a - &(&plant.b * &(&b_inv * &o_a_prime));
    let n = &plant.p - &(&plant.b * &(&b_inv * &forcing));
    let n_prime = -(&b_inv * &forcing);

    RegStack {
        r,
        o_a,
        o_a_prime,
        o_s,
        o_s_prime,
        p_stack,
        p_prime,
        b,
        m,
        n,
        n_prime,
    }
}

impl RegStack {
    /// Recover the feedforward row from a solved `Π`: `R = −b⁻¹ 𝒪'_A Π + N'`.
    pub fn feedforward_row(&self, pi: &MatrixSignal) -> MatrixSignal {
        -(&MatrixSignal::recip(&self.b) * &(&self.o_a_prime * pi)) + self.n_prime.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, DMatrix};

    fn harmonic_exo() -> Exosystem {
        // S(t) = [[0, 1], [-ω²(t), 0]] with ω²(t) = 1.6 + 0.2(cos 2t + cos √2 t)
        let w2 = MatrixSignal::scalar(1.6)
            + MatrixSignal::sinusoid(0.2, 2.0, 0.0)
            + MatrixSignal::sinusoid(0.2, 2.0_f64.sqrt(), 0.0);
        Exosystem::new(MatrixSignal::block(vec![
            vec![MatrixSignal::zeros(1, 1), MatrixSignal::scalar(1.0)],
            vec![-w2, MatrixSignal::zeros(1, 1)],
        ]))
    }

    fn harmonic_plant() -> PlantInstance {
        PlantInstance::new(
            MatrixSignal::constant(dmatrix![1.0, -2.6; 1.0, -1.0]),
            MatrixSignal::constant(dmatrix![1.0; 0.0]),
            MatrixSignal::constant(dmatrix![1.0, 0.0]),
            MatrixSignal::zeros(2, 2),
            MatrixSignal::constant(dmatrix![-1.0, -1.0]),
        )
    }

    #[test]
    fn first_disturbance_row_vanishes() {
        let st = assemble_stack(&harmonic_plant(), &harmonic_exo(), 1);
        for i in 0..=2000 {
            let t = 0.01 * i as f64;
            assert!(st.p_stack.eval(t).amax() <= 1e-9);
        }
    }

    #[test]
    fn harmonic_example_stacks() {
        let st = assemble_stack(&harmonic_plant(), &harmonic_exo(), 1);
        // 𝒪'_A = C A = first row of A; b = C B = 1.
        assert_eq!(st.o_a_prime.eval(0.3), dmatrix![1.0, -2.6]);
        assert!((st.b.eval_scalar(5.0) - 1.0).abs() < 1e-14);
        // 𝒪'_S = Q S = [ω²(t), -1] with Q = [-1, -1].
        for i in 0..50 {
            let t = 0.2 * i as f64;
            let w2 = 1.6 + 0.2 * ((2.0 * t).cos() + (2.0_f64.sqrt() * t).cos());
            let row = st.o_s_prime.eval(t);
            assert!((row[(0, 0)] - w2).abs() < 1e-12);
            assert!((row[(0, 1)] + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn scalar_tracking_stack_gives_log_derivative_sweep() {
        // ẋ = u, e = c(t)x + w with ẇ = 0: M = −ċ/c, N = 0.
        let mu = 0.125;
        let c = MatrixSignal::sin(&MatrixSignal::time()) + MatrixSignal::scalar(2.0 + mu);
        let plant = PlantInstance::new(
            MatrixSignal::zeros(1, 1),
            MatrixSignal::scalar(1.0),
            c.clone(),
            MatrixSignal::zeros(1, 1),
            MatrixSignal::scalar(1.0),
        );
        let exo = Exosystem::new(MatrixSignal::zeros(1, 1));
        let st = assemble_stack(&plant, &exo, 1);
        for i in 0..100 {
            let t = 0.07 * i as f64;
            let expect = -t.cos() / (t.sin() + 2.0 + mu);
            assert!((st.m.eval_scalar(t) - expect).abs() < 1e-12);
            assert!(st.n.eval(t).amax() < 1e-12);
            assert!(st.o_s_prime.eval(t).amax() < 1e-12);
        }
    }

    #[test]
    fn relative_degree_two_chain_feeds_both_channels() {
        // Double integrator driven by a rotating disturbance.
        let a = MatrixSignal::constant(dmatrix![0.0, 1.0; 0.0, 0.0]);
        let b = MatrixSignal::constant(dmatrix![0.0; 1.0]);
        let c = MatrixSignal::constant(dmatrix![1.0, 0.0]);
        let p = MatrixSignal::constant(dmatrix![0.0, 0.0; 1.0, 0.0]);
        let q = MatrixSignal::constant(dmatrix![0.5, 0.0]);
        let s = MatrixSignal::constant(dmatrix![0.0, 1.0; -1.0, 0.0]);
        let plant = PlantInstance::new(a, b, c, p, q);
        let st = assemble_stack(&plant, &Exosystem::new(s.clone()), 2);
        // 𝒫_1 = (L⁰C)P = CP = [0, 0]; chain therefore stays zero at i=1...
        assert!(st.p_stack.eval(1.0).amax() < 1e-12);
        // ...but 𝒫_2 = L_S 𝒫_1 + (L_A C) P = [0,1]·P-row = [1, 0].
        assert_eq!(st.p_prime.eval(2.0), dmatrix![1.0, 0.0]);
        // M = A − B b⁻¹ 𝒪'_A keeps the first row of A intact.
        let m = st.m.eval(0.0);
        assert_eq!(m[(0, 0)], 0.0);
        assert_eq!(m[(0, 1)], 1.0);
        // second row of M is −𝒪'_A = −L²C = 0 here since A is nilpotent: L²C = [0,0]
        assert_eq!((m[(1, 0)], m[(1, 1)]), (0.0, 0.0));
        // The sweep matrix must satisfy the defining identity pointwise.
        let recompute = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0])
            - DMatrix::from_row_slice(2, 1, &[0.0, 1.0]) * st.o_a_prime.eval(0.0);
        assert_eq!(m, recompute);
    }
}
