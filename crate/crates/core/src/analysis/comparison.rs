use std::f64::consts::PI;

use serde::Serialize;

use super::AnalysisError;
use crate::dynamics::{rhs_singular, Model, ModelParams, Simulation};
use crate::grid::{Grid, GridField};
use crate::growth::GrowthLaw;
use crate::kernel::{build_kernel_with, front_profile, KernelKind, StencilQuadrature};
use crate::stencil::ConvolutionStencil;

pub const ORDERING_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    /// `max_{t, x} (u_low − u_high)_+`.
    pub max_violation: f64,
    pub worst_time: f64,
    pub steps: u64,
    pub passes: bool,
}

/// Runs two ordered initial states with identical numerics and records the
/// largest ordering violation over all steps.
pub fn comparison_harness(
    u0_low: &GridField,
    u0_high: &GridField,
    params: ModelParams,
    stencil: &ConvolutionStencil,
    growth: &GrowthLaw,
) -> Result<ComparisonReport, AnalysisError> {
    if !growth.monotone_cap {
        return Err(AnalysisError::Precondition("growth law must satisfy g(u) <= g(1) on [0, 1]".into()));
    }
    if u0_low.grid != u0_high.grid {
        return Err(AnalysisError::Precondition("initial states live on different grids".into()));
    }
    if let Some(k) = u0_low.values.iter().zip(&u0_high.values).position(|(a, b)| a > b) {
        return Err(AnalysisError::Precondition(format!(
            "initial states are not ordered at node {k}: {} > {}",
            u0_low.values[k], u0_high.values[k]
        )));
    }
    let mut low = Simulation::new(u0_low, params, stencil, growth)?;
    let mut high = Simulation::new(u0_high, params, stencil, growth)?;
    let (n, last) = crate::dynamics::step_plan(params.t_end, params.dt);
    let mut max_violation: f64 = 0.0;
    let mut worst_time = 0.0;
    for k in 1..=n {
        let dt = if k == n { last } else { params.dt };
        low.advance(dt)?;
        high.advance(dt)?;
        let v = low
            .values()
            .iter()
            .zip(high.values())
            .map(|(a, b)| (a - b).max(0.0))
            .fold(0.0, f64::max);
        if v > max_violation {
            max_violation = v;
            worst_time = low.time();
        }
    }
    Ok(ComparisonReport { max_violation, worst_time, steps: n, passes: max_violation <= ORDERING_TOLERANCE })
}

/// Setup of the growth-bump experiment on a half-cell-offset line grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CounterexampleConfig {
    pub ell: f64,
    /// Cells per kernel radius; must be odd so that `ℓ/2` and `0` are
    /// respectively a node and a cell face.
    pub cells_per_ell: usize,
    pub u0: f64,
    pub horizon: f64,
    pub dt: f64,
    /// Half-width of the computational box, in units of `ℓ`.
    pub box_radius: f64,
}

impl Default for CounterexampleConfig {
    fn default() -> Self {
        Self { ell: 1.0, cells_per_ell: 41, u0: 0.6, horizon: 1.0, dt: 0.01, box_radius: 3.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleReport {
    /// `∂t u₁(0, ℓ/2) − ∂t u₂(0, ℓ/2)` from the discrete right-hand sides.
    pub rhs_gap: f64,
    /// `(g(1) − g(u₀)) h(ℓ/2)`.
    pub analytic_gap: f64,
    pub h_half: f64,
    pub first_crossing_time: Option<f64>,
    /// `min_t [u₁(t, ℓ/2) − u₂(t, ℓ/2)]`.
    pub min_difference: f64,
    pub passes: bool,
}

/// Starts `u₂ ≡ u₀` and a state `u₁ ≥ u₂` that is saturated on `x < 0` and
/// equals `u₀` from `ℓ/2` on, and looks for `u₁(t, ℓ/2) < u₂(t, ℓ/2)`.
pub fn comparison_counterexample(
    config: &CounterexampleConfig,
    growth: &GrowthLaw,
) -> Result<CounterexampleReport, AnalysisError> {
    let CounterexampleConfig { ell, cells_per_ell, u0, horizon, dt, box_radius } = *config;
    if growth.monotone_cap {
        return Err(AnalysisError::Precondition(
            "the counterexample needs a growth law with g(u0) > g(1) somewhere".into(),
        ));
    }
    if growth.gain.is_some() {
        return Err(AnalysisError::Precondition("gain laws are not used by this experiment".into()));
    }
    if !(u0 > 0.0 && u0 < 1.0) || growth.g(u0) <= growth.g_one {
        return Err(AnalysisError::Precondition(format!(
            "need u0 in (0, 1) with g(u0) > g(1); g({u0}) = {}, g(1) = {}",
            growth.g(u0),
            growth.g_one
        )));
    }
    if cells_per_ell % 2 == 0 || cells_per_ell < 5 {
        return Err(AnalysisError::InvalidArgument(format!("cells_per_ell must be odd and >= 5, got {cells_per_ell}")));
    }
    let dx = ell / cells_per_ell as f64;
    let (kernel, stencil) = build_kernel_with(KernelKind::IndicatorBall, ell, 1, dx, StencilQuadrature::CellAverage)?;
    let grid = Grid::staggered_box(1, box_radius * ell, dx)?;
    let half = 0.5 * ell;
    let u1 = GridField::from_fn(grid, |p| {
        let x = p[0];
        if x <= 0.0 {
            1.0
        } else if x < half - 1e-12 * ell {
            u0 + (1.0 - u0) * (PI * x / ell).cos().powi(2)
        } else {
            u0
        }
    })?;
    let u2 = GridField::constant(grid, u0)?;
    let probe = grid.nearest([half, 0.0]);

    let params = ModelParams { model: Model::Singular, saturation_eps: 0.0, dt, t_end: horizon };
    let r1 = rhs_singular(&u1, &stencil, growth, 0.0)?;
    let r2 = rhs_singular(&u2, &stencil, growth, 0.0)?;
    let rhs_gap = r1[probe] - r2[probe];
    let h = front_profile(&kernel, ell / 100.0)?;
    let h_half = h.eval(half);
    let analytic_gap = (growth.g_one - growth.g(u0)) * h_half;

    let mut s1 = Simulation::new(&u1, params, &stencil, growth)?;
    let mut s2 = Simulation::new(&u2, params, &stencil, growth)?;
    let (n, last) = crate::dynamics::step_plan(horizon, dt);
    let mut first_crossing_time = None;
    let mut min_difference = u1.values[probe] - u2.values[probe];
    for k in 1..=n {
        let step = if k == n { last } else { dt };
        s1.advance(step)?;
        s2.advance(step)?;
        let d = s1.values()[probe] - s2.values()[probe];
        min_difference = min_difference.min(d);
        if d < 0.0 && first_crossing_time.is_none() {
            first_crossing_time = Some(s1.time());
        }
    }
    Ok(CounterexampleReport {
        rhs_gap,
        analytic_gap,
        h_half,
        first_crossing_time,
        min_difference,
        passes: first_crossing_time.is_some() && rhs_gap < 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::build_kernel;

    #[test]
    fn equal_data_have_zero_gap() {
        let (_, st) = build_kernel(KernelKind::IndicatorBall, 1.0, 1, 0.1).unwrap();
        let grid = Grid::centered_box(1, 4.0, 0.1).unwrap();
        let g = GrowthLaw::linear(1.0).unwrap();
        let u = GridField::from_fn(grid, |p| (1.0 - p[0].abs()).clamp(0.0, 1.0)).unwrap();
        let params = ModelParams { model: Model::Singular, saturation_eps: 0.0, dt: 0.05, t_end: 1.0 };
        let rep = comparison_harness(&u, &u, params, &st, &g).unwrap();
        assert_eq!(rep.max_violation, 0.0);
        let mut bad = u.clone();
        bad.values[0] = 0.5;
        assert!(comparison_harness(&bad, &u, params, &st, &g).is_err());
        let bump = GrowthLaw::logistic(1.0, 1.2).unwrap();
        assert!(comparison_harness(&u, &u, params, &st, &bump).is_err());
    }

    #[test]
    fn counterexample_refuses_capped_growth() {
        let g = GrowthLaw::linear(1.0).unwrap();
        assert!(comparison_counterexample(&CounterexampleConfig::default(), &g).is_err());
    }
}
