//! Uniform grids in one or two dimensions and the density field living on them.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("grid dimension must be 1 or 2, got {0}")]
    Dimension(usize),
    #[error("grid spacing must be positive and finite, got {0}")]
    Spacing(f64),
    #[error("grid must have at least one node along every axis")]
    Empty,
    #[error("field has {got} values but the grid has {expected} nodes")]
    Length { expected: usize, got: usize },
    #[error("density value {value} at node {index} lies outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },
}

/// Node layout of a uniform grid.
///
/// Values are stored row-major with the second axis contiguous. One-dimensional
/// grids use `shape = [n, 1]` and a zero second coordinate, so every node has a
/// well-defined planar position `[x, 0]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    dim: usize,
    shape: [usize; 2],
    spacing: f64,
    origin: [f64; 2],
}

impl Grid {
    pub fn new(dim: usize, shape: [usize; 2], spacing: f64, origin: [f64; 2]) -> Result<Self, GridError> {
        if dim != 1 && dim != 2 {
            return Err(GridError::Dimension(dim));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(GridError::Spacing(spacing));
        }
        let shape = if dim == 1 { [shape[0], 1] } else { shape };
        if shape[0] == 0 || shape[1] == 0 {
            return Err(GridError::Empty);
        }
        let origin = if dim == 1 { [origin[0], 0.0] } else { origin };
        Ok(Self { dim, shape, spacing, origin })
    }

    /// Box `[-radius, radius]^dim` with a node at the origin.
    pub fn centered_box(dim: usize, radius: f64, spacing: f64) -> Result<Self, GridError> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(GridError::Spacing(spacing));
        }
        let half = (radius / spacing).round().max(0.0) as usize;
        let n = 2 * half + 1;
        let start = -(half as f64) * spacing;
        Self::new(dim, [n, n], spacing, [start, start])
    }

    /// Box `[-radius, radius]^dim` whose nodes sit at half-cell offsets, so that
    /// the hyperplane `x_1 = 0` is a cell face rather than a node.
    pub fn staggered_box(dim: usize, radius: f64, spacing: f64) -> Result<Self, GridError> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(GridError::Spacing(spacing));
        }
        let half = (radius / spacing).round().max(1.0) as usize;
        let n = 2 * half;
        let start = -(half as f64 - 0.5) * spacing;
        Self::new(dim, [n, n], spacing, [start, start])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> [usize; 2] {
        self.shape
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.shape[0] * self.shape[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.shape[1] + j
    }

    #[inline]
    pub fn unravel(&self, idx: usize) -> (usize, usize) {
        (idx / self.shape[1], idx % self.shape[1])
    }

    /// Physical position of a node.
    #[inline]
    pub fn coords(&self, idx: usize) -> [f64; 2] {
        let (i, j) = self.unravel(idx);
        let x = self.origin[0] + i as f64 * self.spacing;
        if self.dim == 1 {
            [x, 0.0]
        } else {
            [x, self.origin[1] + j as f64 * self.spacing]
        }
    }

    /// Index of the node closest to `point`, clamped to the grid.
    pub fn nearest(&self, point: [f64; 2]) -> usize {
        let axis = |k: usize| {
            let t = ((point[k] - self.origin[k]) / self.spacing).round();
            t.clamp(0.0, (self.shape[k] - 1) as f64) as usize
        };
        if self.dim == 1 {
            axis(0)
        } else {
            self.index(axis(0), axis(1))
        }
    }

    /// Evaluate `f` at every node.
    pub fn sample(&self, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        (0..self.len()).map(|idx| f(self.coords(idx))).collect()
    }

    /// Largest distance from a node to the origin.
    pub fn max_radius(&self) -> f64 {
        (0..self.len()).map(|idx| norm(self.coords(idx))).fold(0.0, f64::max)
    }

    /// Discrete Lipschitz constant of `values`: the largest difference quotient
    /// between axis neighbours.
    pub fn lipschitz(&self, values: &[f64]) -> f64 {
        let [nx, ny] = self.shape;
        let mut worst: f64 = 0.0;
        for i in 0..nx {
            for j in 0..ny {
                let v = values[self.index(i, j)];
                if i + 1 < nx {
                    worst = worst.max((values[self.index(i + 1, j)] - v).abs());
                }
                if j + 1 < ny {
                    worst = worst.max((values[self.index(i, j + 1)] - v).abs());
                }
            }
        }
        worst / self.spacing
    }
}

#[inline]
pub fn norm(p: [f64; 2]) -> f64 {
    p[0].hypot(p[1])
}

/// The density `u(t, ·)` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub time: f64,
}

impl GridField {
    /// Wraps sampled values, rejecting anything outside `[0, 1]` (including NaN).
    pub fn new(grid: Grid, values: Vec<f64>, time: f64) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::Length { expected: grid.len(), got: values.len() });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(GridError::OutOfRange { index, value });
        }
        Ok(Self { grid, values, time })
    }

    pub fn constant(grid: Grid, value: f64) -> Result<Self, GridError> {
        Self::new(grid, vec![value; grid.len()], 0.0)
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 2]) -> f64) -> Result<Self, GridError> {
        Self::new(grid, grid.sample(f), 0.0)
    }

    /// Nodes where the density has reached the saturation threshold `1 - eps`.
    pub fn saturated_mask(&self, eps: f64) -> Vec<bool> {
        saturated_mask(&self.values, eps)
    }
}

pub fn saturated_mask(values: &[f64], eps: f64) -> Vec<bool> {
    let threshold = 1.0 - eps;
    values.iter().map(|&v| v >= threshold).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_box_has_a_node_at_zero() {
        let g = Grid::centered_box(1, 2.0, 0.25).unwrap();
        assert_eq!(g.len(), 17);
        let mid = g.nearest([0.0, 0.0]);
        assert_eq!(g.coords(mid), [0.0, 0.0]);
    }

    #[test]
    fn staggered_box_straddles_zero() {
        let g = Grid::staggered_box(1, 1.0, 0.25).unwrap();
        assert_eq!(g.len(), 8);
        assert!((g.coords(3)[0] + 0.125).abs() < 1e-15);
        assert!((g.coords(4)[0] - 0.125).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_values_are_rejected() {
        let g = Grid::centered_box(1, 1.0, 0.5).unwrap();
        assert!(matches!(
            GridField::new(g, vec![0.0, 1.5, 0.0, 0.0, 0.0], 0.0),
            Err(GridError::OutOfRange { index: 1, .. })
        ));
        assert!(GridField::new(g, vec![0.0, f64::NAN, 0.0, 0.0, 0.0], 0.0).is_err());
        assert!(GridField::new(g, vec![0.0; 4], 0.0).is_err());
    }

    #[test]
    fn lipschitz_of_a_ramp() {
        let g = Grid::centered_box(2, 1.0, 0.1).unwrap();
        let v = g.sample(|p| (0.5 + 0.3 * p[0]).clamp(0.0, 1.0));
        assert!((g.lipschitz(&v) - 0.3).abs() < 1e-9);
    }
}
