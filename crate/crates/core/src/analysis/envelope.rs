use serde::Serialize;

use crate::dynamics::SnapshotRecorder;
use crate::grid::Grid;
use crate::waves::WaveSampler;

pub const ENVELOPE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeReport {
    pub snapshots_checked: usize,
    /// Largest amount by which `u` crosses the envelope (negative if never).
    pub max_excess: f64,
    pub worst_time: f64,
    pub violations: u64,
    pub passes: bool,
}

fn check(
    snapshots: &SnapshotRecorder,
    grid: &Grid,
    from_time: f64,
    excess: impl Fn(f64, [f64; 2], f64) -> f64,
) -> EnvelopeReport {
    let mut rep = EnvelopeReport {
        snapshots_checked: 0,
        max_excess: f64::NEG_INFINITY,
        worst_time: 0.0,
        violations: 0,
        passes: true,
    };
    for (&t, u) in snapshots.times.iter().zip(&snapshots.values) {
        if t < from_time {
            continue;
        }
        rep.snapshots_checked += 1;
        for (k, &v) in u.iter().enumerate() {
            let e = excess(t, grid.coords(k), v);
            if e > rep.max_excess {
                rep.max_excess = e;
                rep.worst_time = t;
            }
            if e > ENVELOPE_TOLERANCE {
                rep.violations += 1;
            }
        }
    }
    rep.passes = rep.violations == 0;
    rep
}

/// `u(t, x) ≤ φ(x·e − c t − M)` for every sampler `x ↦ φ(x·e − M)`, with the
/// front allowed one cell of lead.
pub fn upper_envelope_check(
    snapshots: &SnapshotRecorder,
    grid: &Grid,
    envelopes: &[WaveSampler],
    speed: f64,
) -> EnvelopeReport {
    let dx = grid.spacing();
    check(snapshots, grid, f64::NEG_INFINITY, |t, x, u| {
        envelopes
            .iter()
            .map(|w| u - w.value_at_coordinate(w.coordinate(x) - speed * t - dx))
            .fold(f64::NEG_INFINITY, f64::max)
    })
}

/// `u(t, x) ≥ φ(|x| − c (t − t̄) − R₀)` for `t ≥ t̄`, where the radial sampler
/// carries the offset `R₀`, with one cell of lag allowed.
pub fn lower_envelope_check(
    snapshots: &SnapshotRecorder,
    grid: &Grid,
    radial: &WaveSampler,
    speed: f64,
    t_bar: f64,
) -> EnvelopeReport {
    let dx = grid.spacing();
    check(snapshots, grid, t_bar, |t, x, u| {
        radial.value_at_coordinate(radial.coordinate(x) - speed * (t - t_bar) + dx) - u
    })
}

/// First snapshot time at which every node with `|x| ≤ radius` is saturated.
pub fn invasion_time(snapshots: &SnapshotRecorder, grid: &Grid, radius: f64) -> Option<f64> {
    let inside: Vec<usize> = (0..grid.len())
        .filter(|&k| {
            let p = grid.coords(k);
            p[0].hypot(p[1]) <= radius
        })
        .collect();
    snapshots
        .times
        .iter()
        .zip(&snapshots.masks)
        .find(|(_, m)| inside.iter().all(|&k| m[k]))
        .map(|(&t, _)| t)
}
