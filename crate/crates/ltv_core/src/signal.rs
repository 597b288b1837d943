//! Matrix-valued functions of time with exact derivatives where possible.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::grid::Grid;

/// Step used by the central finite-difference fallback for opaque signals.
pub const FD_STEP: f64 = 1e-5;

type OpaqueFn = dyn Fn(f64) -> DMatrix<f64> + Send + Sync;

enum Node {
    Constant(DMatrix<f64>),
    /// The scalar signal `t` itself (1×1).
    Time,
    /// `amp * cos(freq * t + phase)` (1×1). Closed under differentiation.
    Sinusoid { amp: f64, freq: f64, phase: f64 },
    Cos(MatrixSignal),
    Sin(MatrixSignal),
    Exp(MatrixSignal),
    Sqrt(MatrixSignal),
    /// Entrywise reciprocal of a 1×1 signal.
    Recip(MatrixSignal),
    Sum(MatrixSignal, MatrixSignal),
    /// Matrix product; a 1×1 factor acts as a scalar on either side.
    Product(MatrixSignal, MatrixSignal),
    Scale(f64, MatrixSignal),
    Transpose(MatrixSignal),
    /// Block matrix from a rectangular arrangement of sub-signals.
    Block(Vec<Vec<MatrixSignal>>),
    /// Arbitrary callable; differentiated by central differences.
    Opaque {
        rows: usize,
        cols: usize,
        smooth: u32,
        f: Arc<OpaqueFn>,
    },
    /// Uniformly sampled data with linear interpolation.
    Gridded(Arc<Grid>),
}

/// A matrix-valued function of time.
///
/// Cheap to clone (the expression tree is shared). Dimensions are fixed at
/// construction; combinators panic on dimension mismatch, which is treated
/// as a programming error in the same spirit as `nalgebra` itself.
#[derive(Clone)]
pub struct MatrixSignal {
    node: Arc<Node>,
    rows: usize,
    cols: usize,
}

impl fmt::Debug for MatrixSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MatrixSignal({}x{})", self.rows, self.cols)
    }
}

impl MatrixSignal {
    fn wrap(node: Node, rows: usize, cols: usize) -> Self {
        MatrixSignal {
            node: Arc::new(node),
            rows,
            cols,
        }
    }

    /// Constant matrix signal.
    pub fn constant(m: DMatrix<f64>) -> Self {
        let (r, c) = m.shape();
        Self::wrap(Node::Constant(m), r, c)
    }

    /// Constant 1×1 signal.
    pub fn scalar(v: f64) -> Self {
        Self::constant(DMatrix::from_element(1, 1, v))
    }

    /// The scalar signal `t`.
    pub fn time() -> Self {
        Self::wrap(Node::Time, 1, 1)
    }

    /// Zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::constant(DMatrix::zeros(rows, cols))
    }

    /// Identity matrix of the given order.
    pub fn identity(n: usize) -> Self {
        Self::constant(DMatrix::identity(n, n))
    }

    /// `amp * cos(freq * t + phase)` as a 1×1 signal.
    pub fn sinusoid(amp: f64, freq: f64, phase: f64) -> Self {
        Self::wrap(Node::Sinusoid { amp, freq, phase }, 1, 1)
    }

    /// Cosine of a 1×1 signal.
    pub fn cos(inner: &MatrixSignal) -> Self {
        inner.expect_scalar("cos");
        Self::wrap(Node::Cos(inner.clone()), 1, 1)
    }

    /// Sine of a 1×1 signal.
    pub fn sin(inner: &MatrixSignal) -> Self {
        inner.expect_scalar("sin");
        Self::wrap(Node::Sin(inner.clone()), 1, 1)
    }

    /// Exponential of a 1×1 signal.
    pub fn exp(inner: &MatrixSignal) -> Self {
        inner.expect_scalar("exp");
        Self::wrap(Node::Exp(inner.clone()), 1, 1)
    }

    /// Square root of a 1×1 signal.
    pub fn sqrt(inner: &MatrixSignal) -> Self {
        inner.expect_scalar("sqrt");
        Self::wrap(Node::Sqrt(inner.clone()), 1, 1)
    }

    /// Reciprocal of a 1×1 signal.
    pub fn recip(inner: &MatrixSignal) -> Self {
        inner.expect_scalar("recip");
        Self::wrap(Node::Recip(inner.clone()), 1, 1)
    }

    /// Opaque callable with a declared number of meaningful derivatives.
    /// Derivatives are taken by central differences with step [`FD_STEP`].
    pub fn opaque<F>(rows: usize, cols: usize, smooth: u32, f: F) -> Self
    where
        F: Fn(f64) -> DMatrix<f64> + Send + Sync + 'static,
    {
        Self::wrap(
            Node::Opaque {
                rows,
                cols,
                smooth,
                f: Arc::new(f),
            },
            rows,
            cols,
        )
    }

    /// Linear interpolation of uniformly sampled data.
    pub fn from_grid(grid: Grid) -> Self {
        let (r, c) = grid.shape();
        Self::wrap(Node::Gridded(Arc::new(grid)), r, c)
    }

    /// Block matrix `[[a, b, ...], [c, d, ...], ...]`.
    ///
    /// All blocks in a row must share their row count; all blocks in a
    /// column must share their column count.
    pub fn block(blocks: Vec<Vec<MatrixSignal>>) -> Self {
        assert!(!blocks.is_empty() && !blocks[0].is_empty(), "empty block");
        let ncols_blocks = blocks[0].len();
        let mut total_rows = 0;
        for row in &blocks {
            assert_eq!(row.len(), ncols_blocks, "ragged block structure");
            let rh = row[0].rows;
            for b in row {
                assert_eq!(b.rows, rh, "block row height mismatch");
            }
            total_rows += rh;
        }
        let mut total_cols = 0;
        for j in 0..ncols_blocks {
            let cw = blocks[0][j].cols;
            for row in &blocks {
                assert_eq!(row[j].cols, cw, "block column width mismatch");
            }
            total_cols += cw;
        }
        Self::wrap(Node::Block(blocks), total_rows, total_cols)
    }

    /// Transposed signal.
    pub fn t(&self) -> Self {
        Self::wrap(Node::Transpose(self.clone()), self.cols, self.rows)
    }

    /// Scalar multiple.
    pub fn scale(&self, a: f64) -> Self {
        Self::wrap(Node::Scale(a, self.clone()), self.rows, self.cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_scalar(&self) -> bool {
        self.rows == 1 && self.cols == 1
    }

    fn expect_scalar(&self, what: &str) {
        assert!(
            self.is_scalar(),
            "{what} expects a 1x1 signal, got {}x{}",
            self.rows,
            self.cols
        );
    }

    /// Number of derivatives available before the finite-difference
    /// fallback participates; `None` means every derivative is exact.
    pub fn smoothness(&self) -> Option<u32> {
        match &*self.node {
            Node::Constant(_) | Node::Time | Node::Sinusoid { .. } => None,
            Node::Cos(a) | Node::Sin(a) | Node::Exp(a) | Node::Sqrt(a) | Node::Recip(a) => {
                a.smoothness()
            }
            Node::Sum(a, b) | Node::Product(a, b) => opt_min(a.smoothness(), b.smoothness()),
            Node::Scale(_, a) | Node::Transpose(a) => a.smoothness(),
            Node::Block(rows) => {
                let mut s = None;
                for row in rows {
                    for b in row {
                        s = opt_min(s, b.smoothness());
                    }
                }
                s
            }
            Node::Opaque { smooth, .. } => Some(*smooth),
            // Linear interpolation is continuous with a piecewise-constant
            // first derivative recovered by node differences.
            Node::Gridded(_) => Some(1),
        }
    }

    /// Evaluate at time `t`.
    pub fn eval(&self, t: f64) -> DMatrix<f64> {
        match &*self.node {
            Node::Constant(m) => m.clone(),
            Node::Time => DMatrix::from_element(1, 1, t),
            Node::Sinusoid { amp, freq, phase } => {
                DMatrix::from_element(1, 1, amp * (freq * t + phase).cos())
            }
            Node::Cos(a) => DMatrix::from_element(1, 1, a.eval_scalar(t).cos()),
            Node::Sin(a) => DMatrix::from_element(1, 1, a.eval_scalar(t).sin()),
            Node::Exp(a) => DMatrix::from_element(1, 1, a.eval_scalar(t).exp()),
            Node::Sqrt(a) => DMatrix::from_element(1, 1, a.eval_scalar(t).sqrt()),
            Node::Recip(a) => DMatrix::from_element(1, 1, a.eval_scalar(t).recip()),
            Node::Sum(a, b) => a.eval(t) + b.eval(t),
            Node::Product(a, b) => {
                if a.is_scalar() && !b.is_scalar() {
                    b.eval(t) * a.eval_scalar(t)
                } else if b.is_scalar() && !a.is_scalar() {
                    a.eval(t) * b.eval_scalar(t)
                } else {
                    a.eval(t) * b.eval(t)
                }
            }
            Node::Scale(c, a) => a.eval(t) * *c,
            Node::Transpose(a) => a.eval(t).transpose(),
            Node::Block(rows) => {
                let mut out = DMatrix::zeros(self.rows, self.cols);
                let mut r0 = 0;
                for row in rows {
                    let rh = row[0].rows;
                    let mut c0 = 0;
                    for b in row {
                        out.view_mut((r0, c0), (b.rows, b.cols))
                            .copy_from(&b.eval(t));
                        c0 += b.cols;
                    }
                    r0 += rh;
                }
                out
            }
            Node::Opaque { f, rows, cols, .. } => {
                let m = f(t);
                assert_eq!(
                    m.shape(),
                    (*rows, *cols),
                    "opaque signal returned wrong shape"
                );
                m
            }
            Node::Gridded(g) => g.eval(t),
        }
    }

    /// Evaluate a 1×1 signal as a bare scalar.
    pub fn eval_scalar(&self, t: f64) -> f64 {
        self.expect_scalar("eval_scalar");
        self.eval(t)[(0, 0)]
    }

    /// First derivative, exact for closed-form nodes, finite differences
    /// for opaque callables, node differences for gridded data.
    pub fn deriv(&self) -> MatrixSignal {
        match &*self.node {
            Node::Constant(m) => Self::zeros(m.nrows(), m.ncols()),
            Node::Time => Self::scalar(1.0),
            Node::Sinusoid { amp, freq, phase } => Self::sinusoid(
                amp * freq,
                *freq,
                phase + std::f64::consts::FRAC_PI_2,
            ),
            Node::Cos(a) => (Self::sin(a) * a.deriv()).scale(-1.0),
            Node::Sin(a) => Self::cos(a) * a.deriv(),
            Node::Exp(a) => Self::exp(a) * a.deriv(),
            Node::Sqrt(a) => Self::recip(&Self::sqrt(a)).scale(0.5) * a.deriv(),
            Node::Recip(a) => (Self::recip(&(a.clone() * a.clone())) * a.deriv()).scale(-1.0),
            Node::Sum(a, b) => a.deriv() + b.deriv(),
            Node::Product(a, b) => a.deriv() * b.clone() + a.clone() * b.deriv(),
            Node::Scale(c, a) => a.deriv().scale(*c),
            Node::Transpose(a) => a.deriv().t(),
            Node::Block(rows) => Self::block(
                rows.iter()
                    .map(|row| row.iter().map(|b| b.deriv()).collect())
                    .collect(),
            ),
            Node::Opaque { rows, cols, smooth, f } => {
                let f = f.clone();
                let (r, c) = (*rows, *cols);
                Self::opaque(r, c, smooth.saturating_sub(1), move |t| {
                    (f(t + FD_STEP) - f(t - FD_STEP)) / (2.0 * FD_STEP)
                })
            }
            Node::Gridded(g) => Self::from_grid(g.derivative()),
        }
    }

    /// `k`-th derivative.
    pub fn deriv_n(&self, k: usize) -> MatrixSignal {
        let mut s = self.clone();
        for _ in 0..k {
            s = s.deriv();
        }
        s
    }

    /// Sample onto a uniform grid.
    pub fn sample(&self, t0: f64, step: f64, len: usize) -> Grid {
        Grid::from_fn(t0, step, len, |t| self.eval(t))
    }
}

fn opt_min(a: Option<u32>, b: Option<u32>) -> Option<u32> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(x.min(y)),
    }
}

fn product_shape(a: &MatrixSignal, b: &MatrixSignal) -> (usize, usize) {
    if a.is_scalar() && !b.is_scalar() {
        (b.rows, b.cols)
    } else if b.is_scalar() && !a.is_scalar() {
        (a.rows, a.cols)
    } else {
        assert_eq!(
            a.cols, b.rows,
            "product dimension mismatch: {}x{} * {}x{}",
            a.rows, a.cols, b.rows, b.cols
        );
        (a.rows, b.cols)
    }
}

impl std::ops::Add for MatrixSignal {
    type Output = MatrixSignal;
    fn add(self, rhs: MatrixSignal) -> MatrixSignal {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "sum dimension mismatch"
        );
        let (r, c) = (self.rows, self.cols);
        MatrixSignal::wrap(Node::Sum(self, rhs), r, c)
    }
}

impl std::ops::Add for &MatrixSignal {
    type Output = MatrixSignal;
    fn add(self, rhs: &MatrixSignal) -> MatrixSignal {
        self.clone() + rhs.clone()
    }
}

impl std::ops::Sub for MatrixSignal {
    type Output = MatrixSignal;
    fn sub(self, rhs: MatrixSignal) -> MatrixSignal {
        self + rhs.scale(-1.0)
    }
}

impl std::ops::Sub for &MatrixSignal {
    type Output = MatrixSignal;
    fn sub(self, rhs: &MatrixSignal) -> MatrixSignal {
        self.clone() - rhs.clone()
    }
}

impl std::ops::Mul for MatrixSignal {
    type Output = MatrixSignal;
    fn mul(self, rhs: MatrixSignal) -> MatrixSignal {
        let (r, c) = product_shape(&self, &rhs);
        MatrixSignal::wrap(Node::Product(self, rhs), r, c)
    }
}

impl std::ops::Mul for &MatrixSignal {
    type Output = MatrixSignal;
    fn mul(self, rhs: &MatrixSignal) -> MatrixSignal {
        self.clone() * rhs.clone()
    }
}

impl std::ops::Mul<MatrixSignal> for f64 {
    type Output = MatrixSignal;
    fn mul(self, rhs: MatrixSignal) -> MatrixSignal {
        rhs.scale(self)
    }
}

impl std::ops::Mul<&MatrixSignal> for f64 {
    type Output = MatrixSignal;
    fn mul(self, rhs: &MatrixSignal) -> MatrixSignal {
        rhs.scale(self)
    }
}

impl std::ops::Neg for MatrixSignal {
    type Output = MatrixSignal;
    fn neg(self) -> MatrixSignal {
        self.scale(-1.0)
    }
}

impl std::ops::Neg for &MatrixSignal {
    type Output = MatrixSignal;
    fn neg(self) -> MatrixSignal {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn sinusoid_derivative_is_exact() {
        let s = MatrixSignal::sinusoid(2.0, 3.0, 0.4);
        let d = s.deriv();
        for i in 0..100 {
            let t = -1.0 + 0.07 * i as f64;
            let exact = -2.0 * 3.0 * (3.0 * t + 0.4).sin();
            assert!((d.eval_scalar(t) - exact).abs() < 1e-13);
        }
        assert!(s.smoothness().is_none());
    }

    #[test]
    fn product_rule_matches_finite_differences() {
        let a = MatrixSignal::sinusoid(1.0, 2.0, 0.0)
            * MatrixSignal::constant(dmatrix![1.0, -2.6; 1.0, -1.0]);
        let b = MatrixSignal::constant(dmatrix![0.0, 1.0; -1.6, 0.0])
            + MatrixSignal::sinusoid(0.2, 2.0_f64.sqrt(), 0.0) * MatrixSignal::identity(2);
        let p = a.clone() * b.clone();
        let d = p.deriv();
        for i in 0..50 {
            let t = 0.1 * i as f64;
            let h = 1e-6;
            let fd = (p.eval(t + h) - p.eval(t - h)) / (2.0 * h);
            assert!((d.eval(t) - fd).norm() < 1e-7);
        }
    }

    #[test]
    fn scalar_broadcast_in_products() {
        let s = MatrixSignal::scalar(3.0);
        let m = MatrixSignal::constant(dmatrix![1.0, 2.0; 3.0, 4.0]);
        let left = s.clone() * m.clone();
        let right = m.clone() * s;
        assert_eq!(left.eval(0.0), dmatrix![3.0, 6.0; 9.0, 12.0]);
        assert_eq!(left.eval(0.0), right.eval(0.0));
    }

    #[test]
    fn block_assembly_and_derivative() {
        let a = MatrixSignal::sinusoid(1.0, 1.0, 0.0);
        let z = MatrixSignal::zeros(1, 2);
        let m = MatrixSignal::constant(dmatrix![1.0, 0.0; 0.0, 1.0]);
        let blk = MatrixSignal::block(vec![
            vec![a.clone(), z.clone()],
            vec![MatrixSignal::zeros(2, 1), m],
        ]);
        assert_eq!(blk.rows(), 3);
        assert_eq!(blk.cols(), 3);
        let v = blk.eval(0.0);
        assert_eq!(v[(0, 0)], 1.0);
        assert_eq!(v[(1, 1)], 1.0);
        let d = blk.deriv().eval(0.5);
        assert!((d[(0, 0)] + 0.5_f64.sin()).abs() < 1e-14);
        assert_eq!(d[(1, 1)], 0.0);
    }

    #[test]
    fn opaque_falls_back_to_central_differences() {
        let s = MatrixSignal::opaque(1, 1, 0, |t| DMatrix::from_element(1, 1, (2.0 * t).cos()));
        let d = s.deriv();
        let exact = -2.0 * (2.0 * 0.7_f64).sin();
        assert!((d.eval_scalar(0.7) - exact).abs() < 1e-6);
        assert_eq!(s.smoothness(), Some(0));
    }

    #[test]
    fn reciprocal_and_composition_derivatives() {
        // d/dt [ 1 / (sin t + 2) ] = -cos t / (sin t + 2)^2
        let c = MatrixSignal::sin(&MatrixSignal::time()) + MatrixSignal::scalar(2.0);
        let r = MatrixSignal::recip(&c);
        let d = r.deriv();
        for i in 0..30 {
            let t = 0.33 * i as f64;
            let exact = -t.cos() / (t.sin() + 2.0).powi(2);
            assert!((d.eval_scalar(t) - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn transpose_shapes() {
        let m = MatrixSignal::constant(DMatrix::from_row_slice(2, 3, &[1., 2., 3., 4., 5., 6.]));
        let mt = m.t();
        assert_eq!((mt.rows(), mt.cols()), (3, 2));
        assert_eq!(mt.eval(0.0)[(2, 1)], 6.0);
    }
}
