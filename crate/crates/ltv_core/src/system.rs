//! Plant and exosystem descriptions, with affine parametric uncertainty.

use nalgebra::DMatrix;

use crate::signal::MatrixSignal;

/// Exogenous generator `ẇ = S(t) w` (references and disturbances).
#[derive(Clone, Debug)]
pub struct Exosystem {
    pub s: MatrixSignal,
}

impl Exosystem {
    pub fn new(s: MatrixSignal) -> Self {
        assert_eq!(s.rows(), s.cols(), "exosystem matrix must be square");
        Exosystem { s }
    }

    pub fn dim(&self) -> usize {
        self.s.rows()
    }
}

/// A matrix-valued coefficient with affine uncertainty channels:
/// `M(t, μ) = M0(t) + Σ μ[i] · E_i(t)`, where each channel stores the
/// index of the parameter it multiplies in the shared parameter vector.
#[derive(Clone, Debug)]
pub struct UncertainMatrix {
    pub nominal: MatrixSignal,
    pub channels: Vec<(usize, MatrixSignal)>,
}

impl UncertainMatrix {
    /// A coefficient with no uncertainty.
    pub fn known(nominal: MatrixSignal) -> Self {
        UncertainMatrix {
            nominal,
            channels: Vec::new(),
        }
    }

    pub fn new(nominal: MatrixSignal, channels: Vec<(usize, MatrixSignal)>) -> Self {
        let (r, c) = (nominal.rows(), nominal.cols());
        for (_, e) in &channels {
            assert_eq!((e.rows(), e.cols()), (r, c), "channel shape mismatch");
        }
        UncertainMatrix { nominal, channels }
    }

    pub fn rows(&self) -> usize {
        self.nominal.rows()
    }

    pub fn cols(&self) -> usize {
        self.nominal.cols()
    }

    /// Instantiate at a parameter vector.
    pub fn at(&self, mu: &[f64]) -> MatrixSignal {
        let mut out = self.nominal.clone();
        for (idx, e) in &self.channels {
            let v = mu[*idx];
            if v != 0.0 {
                out = out + v * e;
            }
        }
        out
    }
}

/// Plant `ẋ = A(t,μ)x + B(t,μ)u + P(t,μ)w`, `e = C(t,μ)x + Q(t,μ)w`,
/// single input and single regulated error, with shared parameters `μ`.
#[derive(Clone, Debug)]
pub struct UncertainPlant {
    pub a: UncertainMatrix,
    pub b: UncertainMatrix,
    pub c: UncertainMatrix,
    pub p: UncertainMatrix,
    pub q: UncertainMatrix,
    pub mu_dim: usize,
}

impl UncertainPlant {
    pub fn new(
        a: UncertainMatrix,
        b: UncertainMatrix,
        c: UncertainMatrix,
        p: UncertainMatrix,
        q: UncertainMatrix,
        mu_dim: usize,
    ) -> Self {
        let n = a.rows();
        assert_eq!(a.cols(), n);
        assert_eq!((b.rows(), b.cols()), (n, 1), "single-input plant expected");
        assert_eq!((c.rows(), c.cols()), (1, n), "single-error plant expected");
        assert_eq!(p.rows(), n);
        assert_eq!(q.rows(), 1);
        assert_eq!(p.cols(), q.cols(), "P and Q must share the exosystem width");
        let check = |m: &UncertainMatrix| {
            m.channels.iter().all(|(i, _)| *i < mu_dim)
        };
        assert!(
            check(&a) && check(&b) && check(&c) && check(&p) && check(&q),
            "channel index out of range"
        );
        UncertainPlant { a, b, c, p, q, mu_dim }
    }

    /// A plant with no uncertainty channels.
    pub fn certain(
        a: MatrixSignal,
        b: MatrixSignal,
        c: MatrixSignal,
        p: MatrixSignal,
        q: MatrixSignal,
    ) -> Self {
        Self::new(
            UncertainMatrix::known(a),
            UncertainMatrix::known(b),
            UncertainMatrix::known(c),
            UncertainMatrix::known(p),
            UncertainMatrix::known(q),
            0,
        )
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn rho(&self) -> usize {
        self.p.cols()
    }

    /// Instantiate the plant at a parameter vector.
    pub fn at(&self, mu: &[f64]) -> PlantInstance {
        assert_eq!(mu.len(), self.mu_dim, "parameter vector length mismatch");
        PlantInstance {
            a: self.a.at(mu),
            b: self.b.at(mu),
            c: self.c.at(mu),
            p: self.p.at(mu),
            q: self.q.at(mu),
        }
    }

    /// The plant at `μ = 0`.
    pub fn nominal(&self) -> PlantInstance {
        self.at(&vec![0.0; self.mu_dim])
    }
}

/// A concrete (instantiated) plant.
#[derive(Clone, Debug)]
pub struct PlantInstance {
    pub a: MatrixSignal,
    pub b: MatrixSignal,
    pub c: MatrixSignal,
    pub p: MatrixSignal,
    pub q: MatrixSignal,
}

impl PlantInstance {
    pub fn new(
        a: MatrixSignal,
        b: MatrixSignal,
        c: MatrixSignal,
        p: MatrixSignal,
        q: MatrixSignal,
    ) -> Self {
        let n = a.rows();
        assert_eq!(a.cols(), n);
        assert_eq!((b.rows(), b.cols()), (n, 1));
        assert_eq!((c.rows(), c.cols()), (1, n));
        assert_eq!(p.rows(), n);
        assert_eq!(q.rows(), 1);
        assert_eq!(p.cols(), q.cols());
        PlantInstance { a, b, c, p, q }
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn rho(&self) -> usize {
        self.p.cols()
    }

    /// Apply a constant change of coordinates `x' = T x`.
    pub fn change_coordinates(&self, t: &DMatrix<f64>) -> PlantInstance {
        let n = self.n();
        assert_eq!(t.shape(), (n, n));
        let tinv = t
            .clone()
            .try_inverse()
            .expect("coordinate change must be invertible");
        let ts = MatrixSignal::constant(t.clone());
        let tis = MatrixSignal::constant(tinv);
        PlantInstance {
            a: &(&ts * &self.a) * &tis,
            b: &ts * &self.b,
            c: &self.c * &tis,
            p: &ts * &self.p,
            q: self.q.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn uncertain_matrix_instantiation() {
        let m = UncertainMatrix::new(
            MatrixSignal::constant(dmatrix![1.0, -2.6; 1.0, -1.0]),
            vec![
                (0, MatrixSignal::constant(dmatrix![1.0, 0.0; 0.0, -1.0])),
                (1, MatrixSignal::constant(dmatrix![0.0, -1.0; 0.0, 0.0])),
            ],
        );
        let v = m.at(&[-0.25, -0.4375]).eval(0.0);
        assert_eq!(v[(0, 0)], 0.75);
        assert_eq!(v[(0, 1)], -2.6 + 0.4375);
        assert_eq!(v[(1, 1)], -0.75);
    }

    #[test]
    fn coordinate_change_preserves_error_map() {
        // e = Cx + Qw is invariant under x' = Tx with C' = C T^{-1}.
        let plant = PlantInstance::new(
            MatrixSignal::constant(dmatrix![0.0, 1.0; -1.6, 0.0]),
            MatrixSignal::constant(dmatrix![0.0; 1.0]),
            MatrixSignal::constant(dmatrix![1.0, 1.0]),
            MatrixSignal::zeros(2, 2),
            MatrixSignal::constant(dmatrix![-1.0, -1.0]),
        );
        let t = dmatrix![2.0, 1.0; 0.0, 1.0];
        let moved = plant.change_coordinates(&t);
        let x = dmatrix![0.3; -0.7];
        let e0 = plant.c.eval(0.0) * &x;
        let e1 = moved.c.eval(0.0) * (&t * &x);
        assert!((e0 - e1).norm() < 1e-14);
    }
}
