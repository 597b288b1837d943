//! Uniformly sampled matrix data with linear interpolation.

use nalgebra::DMatrix;

/// Relative tolerance for snapping a query time onto a grid node, as a
/// fraction of the step. Keeps stage-aligned lookups exact in the presence
/// of accumulated floating-point fuzz in `t0 + k*h`.
const SNAP: f64 = 1e-6;

/// A matrix-valued function sampled on the uniform grid `t0 + i*step`.
#[derive(Clone, Debug)]
pub struct Grid {
    t0: f64,
    step: f64,
    values: Vec<DMatrix<f64>>,
}

impl Grid {
    pub fn new(t0: f64, step: f64, values: Vec<DMatrix<f64>>) -> Self {
        assert!(step > 0.0, "grid step must be positive");
        assert!(!values.is_empty(), "grid requires at least one sample");
        let shape = values[0].shape();
        assert!(
            values.iter().all(|v| v.shape() == shape),
            "grid samples must share a shape"
        );
        Grid { t0, step, values }
    }

    pub fn from_fn<F: FnMut(f64) -> DMatrix<f64>>(
        t0: f64,
        step: f64,
        len: usize,
        mut f: F,
    ) -> Self {
        let values = (0..len).map(|i| f(t0 + step * i as f64)).collect();
        Grid::new(t0, step, values)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.step * (self.values.len() - 1) as f64
    }

    pub fn shape(&self) -> (usize, usize) {
        self.values[0].shape()
    }

    pub fn node(&self, i: usize) -> &DMatrix<f64> {
        &self.values[i]
    }

    pub fn node_time(&self, i: usize) -> f64 {
        self.t0 + self.step * i as f64
    }

    pub fn values(&self) -> &[DMatrix<f64>] {
        &self.values
    }

    /// Linear interpolation; clamps outside the sampled range. Queries
    /// within a tiny fraction of a node snap to the node value exactly.
    pub fn eval(&self, t: f64) -> DMatrix<f64> {
        let s = (t - self.t0) / self.step;
        let last = (self.values.len() - 1) as f64;
        let s = s.clamp(0.0, last);
        let i = s.floor() as usize;
        let frac = s - i as f64;
        if frac < SNAP {
            self.values[i].clone()
        } else if frac > 1.0 - SNAP {
            self.values[i + 1].clone()
        } else {
            &self.values[i] * (1.0 - frac) + &self.values[i + 1] * frac
        }
    }

    /// Second-order finite differences on the nodes (central in the
    /// interior, one-sided at the ends).
    pub fn derivative(&self) -> Grid {
        let n = self.values.len();
        let h = self.step;
        assert!(n >= 3, "derivative grid needs at least three samples");
        let mut out = Vec::with_capacity(n);
        out.push((-3.0 * &self.values[0] + 4.0 * &self.values[1] - &self.values[2]) / (2.0 * h));
        for i in 1..n - 1 {
            out.push((&self.values[i + 1] - &self.values[i - 1]) / (2.0 * h));
        }
        out.push(
            (3.0 * &self.values[n - 1] - 4.0 * &self.values[n - 2] + &self.values[n - 3])
                / (2.0 * h),
        );
        Grid::new(self.t0, h, out)
    }

    /// Entrywise map over the samples.
    pub fn map<F: FnMut(f64, &DMatrix<f64>) -> DMatrix<f64>>(&self, mut f: F) -> Grid {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| f(self.node_time(i), v))
            .collect();
        Grid::new(self.t0, self.step, values)
    }

    /// Combine two grids sampled on the same nodes.
    pub fn zip<F: FnMut(&DMatrix<f64>, &DMatrix<f64>) -> DMatrix<f64>>(
        &self,
        other: &Grid,
        mut f: F,
    ) -> Grid {
        assert_eq!(self.values.len(), other.values.len(), "grid length mismatch");
        assert!(
            (self.t0 - other.t0).abs() < 1e-12 && (self.step - other.step).abs() < 1e-15,
            "grid alignment mismatch"
        );
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| f(a, b))
            .collect();
        Grid::new(self.t0, self.step, values)
    }

    /// Largest entrywise magnitude over all samples.
    pub fn sup_norm(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v.amax())
            .fold(0.0, f64::max)
    }

    /// Keep every `k`-th sample (the spec'd persistence down-sampling).
    pub fn downsample(&self, k: usize) -> Grid {
        assert!(k >= 1);
        let values: Vec<_> = self.values.iter().step_by(k).cloned().collect();
        Grid::new(self.t0, self.step * k as f64, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_hits_nodes_and_midpoints() {
        let g = Grid::from_fn(0.0, 0.5, 5, |t| DMatrix::from_element(1, 1, t * t));
        assert_eq!(g.eval(1.0)[(0, 0)], 1.0);
        // midpoint of t^2 between 1.0 and 1.5 is (1.0 + 2.25)/2
        assert!((g.eval(1.25)[(0, 0)] - 1.625).abs() < 1e-14);
        // clamps beyond the ends
        assert_eq!(g.eval(9.0)[(0, 0)], 4.0);
    }

    #[test]
    fn node_snapping_is_robust_to_fuzz() {
        let g = Grid::from_fn(0.0, 1e-3, 1001, |t| DMatrix::from_element(1, 1, t.sin()));
        let t = 0.1 + 1e-3 * 250.0; // accumulates representation error
        let exact = g.node(350)[(0, 0)];
        assert_eq!(g.eval(t), DMatrix::from_element(1, 1, exact));
    }

    #[test]
    fn derivative_is_second_order() {
        let g = Grid::from_fn(0.0, 1e-3, 2001, |t| DMatrix::from_element(1, 1, (2.0 * t).sin()));
        let d = g.derivative();
        for i in [0, 500, 1000, 2000] {
            let t = d.node_time(i);
            assert!((d.node(i)[(0, 0)] - 2.0 * (2.0 * t).cos()).abs() < 1e-5);
        }
    }

    #[test]
    fn downsample_preserves_anchors() {
        let g = Grid::from_fn(1.0, 0.1, 101, |t| DMatrix::from_element(1, 1, t));
        let d = g.downsample(10);
        assert_eq!(d.len(), 11);
        assert!((d.step() - 1.0).abs() < 1e-15);
        assert_eq!(d.node(3)[(0, 0)], g.node(30)[(0, 0)]);
    }
}
