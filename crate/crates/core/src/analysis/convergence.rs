use rayon::prelude::*;
use serde::Serialize;

use super::AnalysisError;
use crate::dynamics::{run, stability_cap, Model, ModelParams, RunOptions};
use crate::grid::GridField;
use crate::growth::GrowthLaw;
use crate::stencil::ConvolutionStencil;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaRow {
    pub gamma: f64,
    /// `max_x |u_γ(T, x) − u_∞(T, x)|`.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaStudy {
    pub rows: Vec<GammaRow>,
    pub horizon: f64,
    pub dt: f64,
    pub threshold: f64,
    pub strictly_decreasing: bool,
    pub passes: bool,
}

/// Compares each `u_γ(T)` with the saturated model on the same grid. All runs
/// share the step size of the stiffest one.
pub fn gamma_convergence_study(
    u0: &GridField,
    gammas: &[f64],
    horizon: f64,
    stencil: &ConvolutionStencil,
    growth: &GrowthLaw,
    threshold: f64,
) -> Result<GammaStudy, AnalysisError> {
    if gammas.is_empty() || gammas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(AnalysisError::InvalidArgument("gamma list must be nonempty and increasing".into()));
    }
    let dt = gammas
        .iter()
        .map(|&gamma| stability_cap(&Model::Gamma { gamma }, growth))
        .chain(std::iter::once(stability_cap(&Model::Singular, growth)))
        .fold(f64::INFINITY, f64::min);
    let params = |model| ModelParams { model, saturation_eps: 0.0, dt, t_end: horizon };
    let models: Vec<Model> = std::iter::once(Model::Singular)
        .chain(gammas.iter().map(|&gamma| Model::Gamma { gamma }))
        .collect();
    let finals: Vec<Vec<f64>> = models
        .par_iter()
        .map(|&m| {
            run(u0, params(m), stencil, growth, &mut [], RunOptions { observe_every: u64::MAX })
                .map(|s| s.final_field.values)
                .map_err(|e| match e {
                    crate::dynamics::RunError::Dynamics(d) => AnalysisError::from(d),
                    other => AnalysisError::InvalidArgument(other.to_string()),
                })
        })
        .collect::<Result<_, _>>()?;
    let reference = &finals[0];
    let rows: Vec<GammaRow> = gammas
        .iter()
        .zip(&finals[1..])
        .map(|(&gamma, u)| GammaRow {
            gamma,
            distance: u.iter().zip(reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
        })
        .collect();
    let strictly_decreasing = rows.windows(2).all(|w| w[1].distance < w[0].distance);
    let passes = strictly_decreasing && rows.last().is_some_and(|r| r.distance < threshold);
    Ok(GammaStudy { rows, horizon, dt, threshold, strictly_decreasing, passes })
}
