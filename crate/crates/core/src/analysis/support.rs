use serde::Serialize;

use crate::dynamics::SnapshotRecorder;
use crate::grid::Grid;
use crate::stencil::ConvolutionStencil;

use super::FrontTrack;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportReport {
    pub snapshots_checked: usize,
    /// Cells with `u > 0` outside `supp u₀ ∪ (S(t) ⊕ B_{ℓ+Δx})`, summed over snapshots.
    pub violations: u64,
    pub first_violation_time: Option<f64>,
    /// First snapshot whose saturated set contains the initial support.
    pub cover_time: Option<f64>,
    /// Largest `radius_support − radius_saturated` after the cover time.
    pub max_radius_gap: Option<f64>,
    pub radius_gap_bound: f64,
    pub passes: bool,
}

/// Checks `Supp u(t) ⊆ Supp u(0) ∪ (S(t) ⊕ B_ℓ)` on every recorded snapshot,
/// with one cell of slack on the dilation radius, and the radius gap once the
/// saturated set covers the initial support.
pub fn support_confinement_check(
    snapshots: &SnapshotRecorder,
    grid: &Grid,
    stencil: &ConvolutionStencil,
    track: Option<&FrontTrack>,
) -> SupportReport {
    let dx = grid.spacing();
    let reach = stencil.radius + dx;
    let r = (reach / dx).floor() as i64;
    let disk: Vec<(i64, i64)> = (-r..=r)
        .flat_map(|i| {
            let js = if grid.dim() == 1 { 0..=0 } else { -r..=r };
            js.map(move |j| (i, j))
        })
        .filter(|&(i, j)| ((i * i + j * j) as f64).sqrt() * dx <= reach * (1.0 + 1e-12))
        .collect();
    let [nx, ny] = grid.shape();

    let initial: Vec<bool> = snapshots.values.first().map(|v| v.iter().map(|&u| u > 0.0).collect()).unwrap_or_default();
    let mut violations = 0u64;
    let mut first_violation_time = None;
    let mut cover_time = None;
    for ((t, u), mask) in snapshots.times.iter().zip(&snapshots.values).zip(&snapshots.masks) {
        let mut allowed = initial.clone();
        for idx in 0..mask.len() {
            if !mask[idx] {
                continue;
            }
            let (i, j) = grid.unravel(idx);
            // Interior mask cells add nothing beyond what their boundary neighbours add.
            let interior = neighbours(i, j, nx, ny, grid.dim()).all(|n| n.is_some_and(|n| mask[n]));
            if interior {
                allowed[idx] = true;
                continue;
            }
            for &(di, dj) in &disk {
                let (si, sj) = (i as i64 + di, j as i64 + dj);
                if si >= 0 && si < nx as i64 && sj >= 0 && sj < ny as i64 {
                    allowed[si as usize * ny + sj as usize] = true;
                }
            }
        }
        let bad = u.iter().zip(&allowed).filter(|(&v, &ok)| v > 0.0 && !ok).count() as u64;
        if bad > 0 && first_violation_time.is_none() {
            first_violation_time = Some(*t);
        }
        violations += bad;
        if cover_time.is_none() && initial.iter().zip(mask).all(|(&s, &m)| !s || m) {
            cover_time = Some(*t);
        }
    }
    let radius_gap_bound = stencil.radius + dx;
    let max_radius_gap = match (track, cover_time) {
        (Some(tr), Some(tc)) => tr
            .times
            .iter()
            .zip(tr.radius_support.iter().zip(&tr.radius_saturated))
            .filter(|(&t, _)| t >= tc)
            .map(|(_, (a, b))| a - b)
            .fold(None, |acc: Option<f64>, g| Some(acc.map_or(g, |a| a.max(g)))),
        _ => None,
    };
    let gap_ok = max_radius_gap.map_or(true, |g| g <= radius_gap_bound * (1.0 + 1e-12));
    SupportReport {
        snapshots_checked: snapshots.times.len(),
        violations,
        first_violation_time,
        cover_time,
        max_radius_gap,
        radius_gap_bound,
        passes: violations == 0 && gap_ok,
    }
}

fn neighbours(i: usize, j: usize, nx: usize, ny: usize, dim: usize) -> impl Iterator<Item = Option<usize>> {
    let mut out = vec![
        (i > 0).then(|| (i - 1) * ny + j),
        (i + 1 < nx).then(|| (i + 1) * ny + j),
    ];
    if dim == 2 {
        out.push((j > 0).then(|| i * ny + j - 1));
        out.push((j + 1 < ny).then(|| i * ny + j + 1));
    }
    out.into_iter()
}
