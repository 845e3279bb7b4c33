use serde::Serialize;

use super::AnalysisError;
use crate::dynamics::{Frame, Observer, ObserverError};

pub const DEFAULT_SUPPORT_FLOOR: f64 = 1e-12;

/// Saturated and support radii over time. Empty sets are reported as `−∞`.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct FrontTrack {
    pub times: Vec<f64>,
    pub radius_saturated: Vec<f64>,
    pub radius_support: Vec<f64>,
    pub direction: Option<[f64; 2]>,
}

impl FrontTrack {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Both radius sequences are nondecreasing.
    pub fn is_monotone(&self) -> bool {
        let up = |v: &[f64]| v.windows(2).all(|w| w[1] >= w[0]);
        up(&self.radius_saturated) && up(&self.radius_support)
    }
}

/// Observer recording the largest `|x|` (or `x·e` for planar runs) over the
/// saturated cells and over the cells with `u > support_floor`.
#[derive(Debug, Clone)]
pub struct FrontTracker {
    pub support_floor: f64,
    pub track: FrontTrack,
}

impl FrontTracker {
    pub fn new(direction: Option<[f64; 2]>) -> Self {
        Self {
            support_floor: DEFAULT_SUPPORT_FLOOR,
            track: FrontTrack { direction, ..Default::default() },
        }
    }

    pub fn with_floor(mut self, floor: f64) -> Self {
        self.support_floor = floor;
        self
    }
}

impl Observer for FrontTracker {
    fn observe(&mut self, frame: &Frame<'_>) -> Result<(), ObserverError> {
        let dir = self.track.direction;
        let position = |k: usize| {
            let p = frame.grid.coords(k);
            match dir {
                Some(e) => p[0] * e[0] + p[1] * e[1],
                None => p[0].hypot(p[1]),
            }
        };
        let mut sat = f64::NEG_INFINITY;
        let mut sup = f64::NEG_INFINITY;
        for (k, (&u, &m)) in frame.values.iter().zip(frame.mask).enumerate() {
            if u > self.support_floor {
                let r = position(k);
                sup = sup.max(r);
                if m {
                    sat = sat.max(r);
                }
            }
        }
        self.track.times.push(frame.time);
        self.track.radius_saturated.push(sat);
        self.track.radius_support.push(sup);
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeedEstimate {
    pub fitted_speed: f64,
    pub intercept: f64,
    pub fit_window: (f64, f64),
    /// Root-mean-square residual of the linear fit.
    pub residual: f64,
    pub points: usize,
    pub reference_c_star: Option<f64>,
    /// No front motion inside the window.
    pub degenerate: bool,
}

impl SpeedEstimate {
    pub fn relative_error(&self) -> Option<f64> {
        self.reference_c_star.map(|c| (self.fitted_speed - c).abs() / c)
    }
}

pub const MIN_FIT_POINTS: usize = 10;

/// Least-squares slope of the saturated radius over the last
/// `window_fraction` of the run (at most one half).
pub fn estimate_speed(
    track: &FrontTrack,
    window_fraction: f64,
    reference_c_star: Option<f64>,
) -> Result<SpeedEstimate, AnalysisError> {
    if !(window_fraction > 0.0 && window_fraction <= 0.5) {
        return Err(AnalysisError::InvalidArgument(format!(
            "window_fraction must lie in (0, 0.5], got {window_fraction}"
        )));
    }
    let Some(&t_last) = track.times.last() else {
        return Err(AnalysisError::InsufficientData { needed: MIN_FIT_POINTS, got: 0 });
    };
    let t0 = track.times[0];
    let t_start = t_last - window_fraction * (t_last - t0);
    let pts: Vec<(f64, f64)> = track
        .times
        .iter()
        .zip(&track.radius_saturated)
        .filter(|(&t, &r)| t >= t_start && r.is_finite())
        .map(|(&t, &r)| (t, r))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(AnalysisError::InsufficientData { needed: MIN_FIT_POINTS, got: pts.len() });
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mr = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let str_: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - mr)).sum();
    let slope = if stt > 0.0 { str_ / stt } else { 0.0 };
    let intercept = mr - slope * mt;
    let residual = (pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    let degenerate = pts.iter().all(|p| p.1 == pts[0].1);
    Ok(SpeedEstimate {
        fitted_speed: slope,
        intercept,
        fit_window: (pts[0].0, pts[pts.len() - 1].0),
        residual,
        points: pts.len(),
        reference_c_star,
        degenerate,
    })
}
