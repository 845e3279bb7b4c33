use serde::Serialize;

use super::AnalysisError;
use crate::dynamics::{obstacle_residual, step_plan, ModelParams, Simulation};
use crate::grid::GridField;
use crate::growth::GrowthLaw;
use crate::stencil::ConvolutionStencil;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualRun {
    pub dx: f64,
    pub dt: f64,
    /// `max_{n, x} |residual|` over all consecutive pairs of states.
    pub max_abs_residual: f64,
    pub worst_time: f64,
}

/// Runs the saturated model and evaluates the obstacle residual on every
/// consecutive pair of states.
pub fn max_obstacle_residual(
    u0: &GridField,
    params: ModelParams,
    stencil: &ConvolutionStencil,
    growth: &GrowthLaw,
) -> Result<ResidualRun, AnalysisError> {
    let mut sim = Simulation::new(u0, params, stencil, growth)?;
    let (n, last) = step_plan(params.t_end, params.dt);
    let mut before = sim.field();
    let mut max_abs_residual: f64 = 0.0;
    let mut worst_time = 0.0;
    for k in 1..=n {
        let dt = if k == n { last } else { params.dt };
        sim.advance(dt)?;
        let after = sim.field();
        let res = obstacle_residual(&before, &after, dt, stencil, growth, params.saturation_eps)?;
        let m = res.iter().map(|r| r.abs()).fold(0.0, f64::max);
        if m > max_abs_residual {
            max_abs_residual = m;
            worst_time = after.time;
        }
        before = after;
    }
    Ok(ResidualRun { dx: u0.grid.spacing(), dt: params.dt, max_abs_residual, worst_time })
}
