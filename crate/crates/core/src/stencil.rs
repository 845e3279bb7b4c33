//! Discrete realisation of the convolution `K * f` on a uniform grid.

use rayon::prelude::*;
use serde::Serialize;

use crate::grid::Grid;
use crate::kernel::KernelError;

/// Below this many nodes the convolution runs on the calling thread.
const PARALLEL_THRESHOLD: usize = 4096;

/// Integer offsets within the kernel support together with their weights
/// (`K(offset) * cell_volume`, renormalised to unit sum).
#[derive(Debug, Clone, Serialize)]
pub struct ConvolutionStencil {
    pub dim: usize,
    pub grid_spacing: f64,
    pub radius: f64,
    pub offsets: Vec<[i32; 2]>,
    pub weights: Vec<f64>,
    #[serde(skip)]
    reach: usize,
    /// One entry per first-axis offset `di`, covering a contiguous range of
    /// second-axis offsets; weights are stored reversed for the gather loop.
    #[serde(skip)]
    rows: Vec<Row>,
    /// Result of the gather loop over a fully saturated window.
    #[serde(skip)]
    full_sum: f64,
}

#[derive(Debug, Clone)]
struct Row {
    di: i32,
    dj_lo: i32,
    flipped: Vec<f64>,
}

impl ConvolutionStencil {
    /// Builds a stencil from a weight function over a square of offsets
    /// `[-reach, reach]^dim`. Weights are normalised here; the raw total is
    /// returned alongside.
    pub(crate) fn from_weight_fn(
        dim: usize,
        grid_spacing: f64,
        radius: f64,
        reach: usize,
        weight: impl Fn(i32, i32) -> f64,
    ) -> Result<(Self, f64), KernelError> {
        let r = reach as i32;
        let second = if dim == 1 { 0..=0 } else { -r..=r };
        let mut raw: Vec<([i32; 2], f64)> = Vec::new();
        for di in -r..=r {
            for dj in second.clone() {
                let w = weight(di, dj);
                if w < 0.0 || !w.is_finite() {
                    let radius = (di as f64).hypot(dj as f64) * grid_spacing;
                    return Err(KernelError::NegativeProfile { radius, value: w });
                }
                if w > 0.0 {
                    raw.push(([di, dj], w));
                }
            }
        }
        let total: f64 = raw.iter().map(|(_, w)| w).sum();
        if !(total > 0.0) {
            return Err(KernelError::ZeroMass);
        }
        let offsets: Vec<[i32; 2]> = raw.iter().map(|(o, _)| *o).collect();
        let weights: Vec<f64> = raw.iter().map(|(_, w)| w / total).collect();

        let mut rows: Vec<Row> = Vec::new();
        for (o, &w) in offsets.iter().zip(&weights) {
            match rows.last_mut() {
                Some(row) if row.di == o[0] => {
                    let t = (o[1] - row.dj_lo) as usize;
                    row.flipped.resize(t + 1, 0.0);
                    row.flipped[t] = w;
                }
                _ => rows.push(Row { di: o[0], dj_lo: o[1], flipped: vec![w] }),
            }
        }
        for row in &mut rows {
            row.flipped.reverse();
        }
        let mut stencil = Self {
            dim,
            grid_spacing,
            radius,
            offsets,
            weights,
            reach,
            rows,
            full_sum: 0.0,
        };
        stencil.full_sum = stencil.gather_full();
        Ok((stencil, total))
    }

    pub fn reach(&self) -> usize {
        self.reach
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Weight at an offset, zero outside the stencil.
    pub fn weight_at(&self, offset: [i32; 2]) -> f64 {
        self.offsets
            .binary_search(&offset)
            .map(|k| self.weights[k])
            .unwrap_or(0.0)
    }

    /// Exact comparison of weights at offsets related by reflections (and the
    /// axis swap in two dimensions).
    pub fn check_radial_symmetry(&self) -> Result<(), KernelError> {
        for (o, &w) in self.offsets.iter().zip(&self.weights) {
            let mut images = vec![[-o[0], o[1]]];
            if self.dim == 2 {
                images.extend([[o[0], -o[1]], [o[1], o[0]], [-o[1], -o[0]]]);
            }
            if images.iter().any(|&img| self.weight_at(img) != w) {
                return Err(KernelError::AsymmetricStencil(*o));
            }
        }
        Ok(())
    }

    /// Lattice surrogate for `‖∇K‖_TV`: the sum of absolute jumps of the
    /// discrete density across every lattice edge, including the edges to the
    /// zero exterior. In two dimensions this is the anisotropic variation,
    /// which dominates the isotropic one.
    pub fn gradient_variation(&self) -> f64 {
        let cell = self.grid_spacing.powi(self.dim as i32);
        let density = |o: [i32; 2]| self.weight_at(o) / cell;
        let r = self.reach as i32 + 1;
        let mut tv = 0.0;
        let second = if self.dim == 1 { 0..=0 } else { -r..=r };
        for di in -r..r {
            for dj in second.clone() {
                tv += (density([di + 1, dj]) - density([di, dj])).abs();
                if self.dim == 2 && dj < r {
                    tv += (density([di, dj + 1]) - density([di, dj])).abs();
                }
            }
        }
        tv * self.grid_spacing.powi(self.dim as i32 - 1)
    }

    fn check_grid(&self, grid: &Grid, len: usize) -> Result<(), KernelError> {
        if grid.dim() != self.dim {
            return Err(KernelError::GridMismatch(format!(
                "stencil is {}-dimensional but grid is {}-dimensional",
                self.dim,
                grid.dim()
            )));
        }
        let rel = (grid.spacing() - self.grid_spacing).abs() / self.grid_spacing;
        if rel > 1e-12 {
            return Err(KernelError::GridMismatch(format!(
                "stencil spacing {} differs from grid spacing {}",
                self.grid_spacing,
                grid.spacing()
            )));
        }
        if len != grid.len() {
            return Err(KernelError::ShapeMismatch { expected: grid.len(), got: len });
        }
        Ok(())
    }

    fn gather_full(&self) -> f64 {
        let mut acc = 0.0;
        for row in &self.rows {
            for &w in &row.flipped {
                acc += w * 1.0;
            }
        }
        acc
    }

    /// `Σ_offsets w · f(x − offset)` with `f` extended by zero outside the grid.
    fn gather(&self, grid: &Grid, values: &[f64], i: usize, j: usize) -> f64 {
        let [nx, ny] = grid.shape();
        let mut acc = 0.0;
        for row in &self.rows {
            let src_i = i as i64 - row.di as i64;
            if src_i < 0 || src_i >= nx as i64 {
                continue;
            }
            let len = row.flipped.len() as i64;
            // Source columns c = j - dj for dj in [dj_lo, dj_lo + len).
            let c_hi = j as i64 - row.dj_lo as i64;
            let c_lo = c_hi - len + 1;
            let lo = c_lo.max(0);
            let hi = c_hi.min(ny as i64 - 1);
            if lo > hi {
                continue;
            }
            let s0 = (lo - c_lo) as usize;
            let base = src_i as usize * ny;
            let src = &values[base + lo as usize..=base + hi as usize];
            for (v, w) in src.iter().zip(&row.flipped[s0..]) {
                acc += w * v;
            }
        }
        acc
    }

    fn run(&self, grid: &Grid, values: &[f64], binary: bool) -> Vec<f64> {
        let [nx, ny] = grid.shape();
        let r = self.reach as i64;
        let table = NonzeroTable::new(grid, values);
        let window_nodes = (2 * r + 1).pow(self.dim as u32) as u64;
        let eval = |idx: usize| -> f64 {
            let (i, j) = grid.unravel(idx);
            let (i0, i1) = (i as i64 - r, i as i64 + r);
            let (j0, j1) = if self.dim == 1 { (0, 0) } else { (j as i64 - r, j as i64 + r) };
            let count = table.count(i0, i1, j0, j1);
            if count == 0 {
                return 0.0;
            }
            let inside = i0 >= 0 && i1 < nx as i64 && j0 >= 0 && j1 < ny as i64;
            if binary && inside && count == window_nodes {
                return self.full_sum;
            }
            self.gather(grid, values, i, j)
        };
        let mut out = vec![0.0; values.len()];
        if values.len() < PARALLEL_THRESHOLD {
            out.iter_mut().enumerate().for_each(|(idx, o)| *o = eval(idx));
        } else {
            out.par_chunks_mut(1024).enumerate().for_each(|(c, chunk)| {
                for (t, o) in chunk.iter_mut().enumerate() {
                    *o = eval(c * 1024 + t);
                }
            });
        }
        out
    }
}

/// Summed-area table of nonzero entries, used to skip windows that are
/// entirely zero (or, for masks, entirely saturated).
struct NonzeroTable {
    nx: usize,
    ny: usize,
    sums: Vec<u64>,
}

impl NonzeroTable {
    fn new(grid: &Grid, values: &[f64]) -> Self {
        let [nx, ny] = grid.shape();
        let mut sums = vec![0u64; (nx + 1) * (ny + 1)];
        for i in 0..nx {
            let mut row = 0u64;
            for j in 0..ny {
                row += (values[i * ny + j] != 0.0) as u64;
                sums[(i + 1) * (ny + 1) + j + 1] = sums[i * (ny + 1) + j + 1] + row;
            }
        }
        Self { nx, ny, sums }
    }

    fn count(&self, i0: i64, i1: i64, j0: i64, j1: i64) -> u64 {
        let i0 = i0.max(0) as usize;
        let j0 = j0.max(0) as usize;
        let i1 = (i1.min(self.nx as i64 - 1) + 1) as usize;
        let j1 = (j1.min(self.ny as i64 - 1) + 1) as usize;
        if i0 >= i1 || j0 >= j1 {
            return 0;
        }
        let w = self.ny + 1;
        self.sums[i1 * w + j1] + self.sums[i0 * w + j0] - self.sums[i0 * w + j1] - self.sums[i1 * w + j0]
    }
}

/// `K * 1_mask`, clamped to `[0, 1]`.
pub fn convolve_mask(stencil: &ConvolutionStencil, grid: &Grid, mask: &[bool]) -> Result<Vec<f64>, KernelError> {
    stencil.check_grid(grid, mask.len())?;
    let values: Vec<f64> = mask.iter().map(|&m| if m { 1.0 } else { 0.0 }).collect();
    let mut out = stencil.run(grid, &values, true);
    for v in &mut out {
        *v = v.clamp(0.0, 1.0);
    }
    Ok(out)
}

/// `K * f` for a real field extended by zero outside the grid.
pub fn convolve(stencil: &ConvolutionStencil, grid: &Grid, values: &[f64]) -> Result<Vec<f64>, KernelError> {
    stencil.check_grid(grid, values.len())?;
    Ok(stencil.run(grid, values, false))
}
