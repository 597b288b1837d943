//! Wiring the exosystem, plant, and controller into one generator.

use ltv_core::{Exosystem, MatrixSignal, PlantInstance};
use stabilizer::Controller;

use crate::SimError;

/// The assembled loop: plant + controller state stacked as `[x; ξ]`,
/// driven by the exosystem through `forcing = [P; G_c·Q]`.
///
/// All the constituent signals are kept alongside the assembled blocks
/// so traces can record `u = H_c ξ` and `e = C x + Q w`, and so the
/// block structure can be audited after the fact.
#[derive(Clone)]
pub struct ClosedLoopSystem {
    /// `(n+ν) × (n+ν)` generator `[[A, B·H_c], [G_c·C, F_c]]`.
    pub a_cl: MatrixSignal,
    /// `(n+ν) × ρ` exosystem coupling `[P; G_c·Q]`.
    pub forcing: MatrixSignal,
    /// Exosystem generator, ρ × ρ.
    pub s: MatrixSignal,
    /// Error readout on the plant state, 1 × n.
    pub c: MatrixSignal,
    /// Error feedthrough from the exosystem, 1 × ρ.
    pub q: MatrixSignal,
    /// Control gain column, n × 1 (kept for the block audit).
    pub b: MatrixSignal,
    /// Controller input column, ν × 1 (kept for the block audit).
    pub g_c: MatrixSignal,
    /// Controller readout, 1 × ν; `u = H_c ξ`.
    pub h_c: MatrixSignal,
    pub n: usize,
    pub nu: usize,
    pub rho: usize,
    /// Parameter vector the plant was instantiated at (trace metadata).
    pub mu: Vec<f64>,
    pub t0: f64,
}

impl ClosedLoopSystem {
    pub fn dim(&self) -> usize {
        self.n + self.nu
    }

    /// Largest absolute deviation, over the given times, between the
    /// off-diagonal blocks of `A_cl` (and the lower block of the
    /// forcing) and their defining products `B·H_c`, `G_c·C`, `G_c·Q`.
    ///
    /// Assembly stores the products themselves, so this returns exactly
    /// zero: the blocks are not merely close, they are the same
    /// floating-point expressions.
    pub fn block_audit(&self, times: &[f64]) -> f64 {
        let (n, nu) = (self.n, self.nu);
        let mut worst: f64 = 0.0;
        for &t in times {
            let m = self.a_cl.eval(t);
            let bh = self.b.eval(t) * self.h_c.eval(t);
            let gc = self.g_c.eval(t) * self.c.eval(t);
            let gq = self.g_c.eval(t) * self.q.eval(t);
            let f = self.forcing.eval(t);
            for i in 0..n {
                for j in 0..nu {
                    worst = worst.max((m[(i, n + j)] - bh[(i, j)]).abs());
                }
            }
            for i in 0..nu {
                for j in 0..n {
                    worst = worst.max((m[(n + i, j)] - gc[(i, j)]).abs());
                }
                for j in 0..self.rho {
                    worst = worst.max((f[(n + i, j)] - gq[(i, j)]).abs());
                }
            }
        }
        worst
    }
}

/// Combine a plant instance, its exosystem, and (optionally) a
/// controller into a [`ClosedLoopSystem`].  `None` gives the open loop:
/// `A_cl = A`, `forcing = P`, ν = 0.  `mu` is carried as metadata into
/// every trace produced from the system.
pub fn assemble_closed_loop(
    plant: &PlantInstance,
    exo: &Exosystem,
    controller: Option<&Controller>,
    mu: &[f64],
) -> Result<ClosedLoopSystem, SimError> {
    let n = plant.n();
    let rho = exo.dim();
    if plant.rho() != rho {
        return Err(SimError::DimensionMismatch {
            what: format!(
                "plant disturbance width {} vs exosystem dimension {rho}",
                plant.rho()
            ),
        });
    }

    match controller {
        None => Ok(ClosedLoopSystem {
            a_cl: plant.a.clone(),
            forcing: plant.p.clone(),
            s: exo.s.clone(),
            c: plant.c.clone(),
            q: plant.q.clone(),
            b: plant.b.clone(),
            g_c: MatrixSignal::zeros(0, 1),
            h_c: MatrixSignal::zeros(1, 0),
            n,
            nu: 0,
            rho,
            mu: mu.to_vec(),
            t0: 0.0,
        }),
        Some(ctrl) => {
            let nu = ctrl.nu();
            if ctrl.f_c.rows() != nu
                || ctrl.f_c.cols() != nu
                || ctrl.g_c.rows() != nu
                || ctrl.g_c.cols() != 1
                || ctrl.h_c.rows() != 1
                || ctrl.h_c.cols() != nu
            {
                return Err(SimError::DimensionMismatch {
                    what: format!(
                        "controller blocks {}x{}, {}x{}, {}x{} against nu = {nu}",
                        ctrl.f_c.rows(),
                        ctrl.f_c.cols(),
                        ctrl.g_c.rows(),
                        ctrl.g_c.cols(),
                        ctrl.h_c.rows(),
                        ctrl.h_c.cols()
                    ),
                });
            }

            let a_cl = MatrixSignal::block(vec![
                vec![plant.a.clone(), &plant.b * &ctrl.h_c],
                vec![&ctrl.g_c * &plant.c, ctrl.f_c.clone()],
            ]);
            let forcing = MatrixSignal::block(vec![
                vec![plant.p.clone()],
                vec![&ctrl.g_c * &plant.q],
            ]);
            Ok(ClosedLoopSystem {
                a_cl,
                forcing,
                s: exo.s.clone(),
                c: plant.c.clone(),
                q: plant.q.clone(),
                b: plant.b.clone(),
                g_c: ctrl.g_c.clone(),
                h_c: ctrl.h_c.clone(),
                n,
                nu,
                rho,
                mu: mu.to_vec(),
                t0: ctrl.t0,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ltv_core::instances::interaction_example;

    #[test]
    fn open_loop_is_the_bare_plant() {
        let (plant, exo) = interaction_example();
        let inst = plant.at(&[0.3]);
        let sys = assemble_closed_loop(&inst, &exo, None, &[0.3]).unwrap();
        assert_eq!(sys.nu, 0);
        assert_eq!(sys.dim(), 2);
        for &t in &[0.0, 1.7, 9.4] {
            assert_eq!(sys.a_cl.eval(t), inst.a.eval(t));
            assert_eq!(sys.forcing.eval(t), inst.p.eval(t));
        }
        assert_eq!(sys.block_audit(&[0.0, 1.7, 9.4]), 0.0);
    }

    #[test]
    fn mismatched_exosystem_is_refused() {
        let (plant, _) = interaction_example();
        let inst = plant.at(&[0.0]);
        let wrong = Exosystem::new(MatrixSignal::zeros(3, 3));
        let err = assemble_closed_loop(&inst, &wrong, None, &[0.0]).unwrap_err();
        assert!(matches!(err, SimError::DimensionMismatch { .. }));
    }
}
