//! Explicit time stepping of the γ-pressure model and the saturated model,
//! with invariant monitoring and the obstacle residual.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{saturated_mask, Grid, GridError, GridField};
use crate::growth::GrowthLaw;
use crate::kernel::KernelError;
use crate::stencil::{convolve, convolve_mask, ConvolutionStencil};

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error("parameter `{name}` is invalid: {reason}")]
    Parameter { name: &'static str, reason: String },
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

fn param(name: &'static str, reason: impl Into<String>) -> DynamicsError {
    DynamicsError::Parameter { name, reason: reason.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    Gamma { gamma: f64 },
    Singular,
    /// Saturated model with an independent gain law: `[g(u) + h(u) K * 1_{u=1}] 1_{u<1}`.
    GeneralizedSingular,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub model: Model,
    /// Cells with `u ≥ 1 − saturation_eps` count as saturated.
    pub saturation_eps: f64,
    pub dt: f64,
    pub t_end: f64,
}

pub const MAX_SATURATION_EPS: f64 = 1e-6;

impl ModelParams {
    pub fn stability_cap(&self, growth: &GrowthLaw) -> f64 {
        stability_cap(&self.model, growth)
    }

    pub fn validate(&self, growth: &GrowthLaw) -> Result<(), DynamicsError> {
        match self.model {
            Model::Gamma { gamma } => {
                if !(gamma.is_finite() && gamma >= 1.0) {
                    return Err(param("gamma", format!("must be at least 1, got {gamma}")));
                }
                if growth.gain.is_some() {
                    return Err(param("gain", "a gain law is only used by the generalized_singular model"));
                }
            }
            Model::Singular => {
                if growth.gain.is_some() {
                    return Err(param("gain", "a gain law is only used by the generalized_singular model"));
                }
            }
            Model::GeneralizedSingular => {
                if growth.gain.is_none() {
                    return Err(param("gain", "the generalized_singular model needs a gain law"));
                }
            }
        }
        if !(0.0..=MAX_SATURATION_EPS).contains(&self.saturation_eps) {
            return Err(param(
                "saturation_eps",
                format!("must lie in [0, {MAX_SATURATION_EPS:e}], got {}", self.saturation_eps),
            ));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(param("t_end", format!("must be nonnegative, got {}", self.t_end)));
        }
        let cap = self.stability_cap(growth);
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(param("dt", format!("must be positive, got {}", self.dt)));
        }
        if self.dt > cap * (1.0 + 1e-12) {
            return Err(param("dt", format!("{} exceeds the stability cap {cap}", self.dt)));
        }
        Ok(())
    }
}

/// `0.1/(γL)` for the γ-model, `0.1/max(L, sup g + sup h_gain)` otherwise.
pub fn stability_cap(model: &Model, growth: &GrowthLaw) -> f64 {
    match *model {
        Model::Gamma { gamma } => (0.1 / growth.lipschitz).min(0.1 / (gamma * growth.lipschitz)),
        Model::Singular | Model::GeneralizedSingular => 0.1 / growth.singular_rhs_bound(),
    }
}

#[inline]
fn pressure(u: f64, gamma: f64) -> f64 {
    if gamma.fract() == 0.0 && gamma <= i32::MAX as f64 {
        u.powi(gamma as i32)
    } else {
        u.powf(gamma)
    }
}

/// Right-hand side of the γ-model together with `Σ_x g(u)(1 − K * p)`, the
/// growth part; the redistribution part has zero sum.
fn gamma_terms(
    grid: &Grid,
    values: &[f64],
    stencil: &ConvolutionStencil,
    growth: &GrowthLaw,
    gamma: f64,
) -> Result<(Vec<f64>, f64), KernelError> {
    let p: Vec<f64> = values.iter().map(|&u| pressure(u, gamma)).collect();
    let gp: Vec<f64> = values.iter().zip(&p).map(|(&u, &p)| growth.g(u) * p).collect();
    let kp = convolve(stencil, grid, &p)?;
    let kgp = convolve(stencil, grid, &gp)?;
    let mut production = 0.0;
    let rhs = values
        .iter()
        .zip(&p)
        .zip(kp.iter().zip(&kgp))
        .map(|((&u, &p), (&kp, &kgp))| {
            let kp = kp.clamp(0.0, 1.0);
            let kgp = kgp.max(0.0);
            let local = growth.g(u) * (1.0 - kp);
            production += local;
            ((local + kgp) * (1.0 - p)).max(0.0)
        })
        .collect();
    Ok((rhs, production))
}

/// Pointwise right-hand side of the γ-model on raw values.
pub fn rhs_gamma_values(
    grid: &Grid,
    values: &[f64],
    stencil: &ConvolutionStencil,
    growth: &GrowthLaw,
    gamma: f64,
) -> Result<Vec<f64>, KernelError> {
    gamma_terms(grid, values, stencil, growth, gamma).map(|t| t.0)
}

pub fn rhs_gamma(
    field: &GridField,
    stencil: &ConvolutionStencil,
    growth: &GrowthLaw,
    gamma: f64,
) -> Result<Vec<f64>, DynamicsError> {
    Ok(rhs_gamma_values(&field.grid, &field.values, stencil, growth, gamma)?)
}

/// Right-hand side of the saturated model given the saturated mask. Zero on
/// the mask.
pub fn rhs_singular_values(
    grid: &Grid,
    values: &[f64],
    mask: &[bool],
    stencil: &ConvolutionStencil,
    growth: &GrowthLaw,
) -> Result<Vec<f64>, KernelError> {
    let km = convolve_mask(stencil, grid, mask)?;
    Ok(values
        .iter()
        .zip(mask)
        .zip(&km)
        .map(|((&u, &m), &km)| if m { 0.0 } else { growth.singular_bracket(u, km).max(0.0) })
        .collect())
}

pub fn rhs_singular(
    field: &GridField,
    stencil: &ConvolutionStencil,
    growth: &GrowthLaw,
    saturation_eps: f64,
) -> Result<Vec<f64>, DynamicsError> {
    let mask = field.saturated_mask(saturation_eps);
    Ok(rhs_singular_values(&field.grid, &field.values, &mask, stencil, growth)?)
}

fn rhs_values(
    grid: &Grid,
    values: &[f64],
    mask: &[bool],
    params: &ModelParams,
    stencil: &ConvolutionStencil,
    growth: &GrowthLaw,
) -> Result<Vec<f64>, KernelError> {
    match params.model {
        Model::Gamma { gamma } => rhs_gamma_values(grid, values, stencil, growth, gamma),
        Model::Singular | Model::GeneralizedSingular => rhs_singular_values(grid, values, mask, stencil, growth),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct StepStats {
    /// Cells where the update `u + dt·RHS` reached 1 from below on this step.
    pub clamped: usize,
    pub rhs_min: f64,
    pub rhs_max: f64,
}

/// One explicit step `u ↦ min(1, u + dt·RHS[u])`.
pub fn step(
    field: &GridField,
    params: &ModelParams,
    stencil: &ConvolutionStencil,
    growth: &GrowthLaw,
) -> Result<(GridField, StepStats), DynamicsError> {
    params.validate(growth)?;
    let mask = field.saturated_mask(params.saturation_eps);
    let rhs = rhs_values(&field.grid, &field.values, &mask, params, stencil, growth)?;
    let mut next = field.values.clone();
    let stats = apply_update(&mut next, &rhs, params.dt);
    Ok((GridField { grid: field.grid, values: next, time: field.time + params.dt }, stats))
}

fn apply_update(values: &mut [f64], rhs: &[f64], dt: f64) -> StepStats {
    let mut stats = StepStats { clamped: 0, rhs_min: f64::INFINITY, rhs_max: f64::NEG_INFINITY };
    for (u, &f) in values.iter_mut().zip(rhs) {
        stats.rhs_min = stats.rhs_min.min(f);
        stats.rhs_max = stats.rhs_max.max(f);
        let trial = *u + dt * f;
        if trial >= 1.0 {
            if *u < 1.0 {
                stats.clamped += 1;
            }
            *u = 1.0;
        } else {
            *u = trial;
        }
    }
    if rhs.is_empty() {
        stats.rhs_min = 0.0;
        stats.rhs_max = 0.0;
    }
    stats
}

/// `max{u − 1, (u_after − u_before)/dt − bracket[u_after]}` with the bracket
/// of the saturated model evaluated on the later state.
pub fn obstacle_residual(
    before: &GridField,
    after: &GridField,
    dt: f64,
    stencil: &ConvolutionStencil,
    growth: &GrowthLaw,
    saturation_eps: f64,
) -> Result<Vec<f64>, DynamicsError> {
    if before.values.len() != after.values.len() {
        return Err(GridError::Length { expected: before.values.len(), got: after.values.len() }.into());
    }
    if !(dt > 0.0) {
        return Err(param("dt", format!("must be positive, got {dt}")));
    }
    let mask = after.saturated_mask(saturation_eps);
    let km = convolve_mask(stencil, &after.grid, &mask)?;
    Ok(before
        .values
        .iter()
        .zip(&after.values)
        .zip(&km)
        .map(|((&ub, &ua), &km)| {
            let bracket = growth.singular_bracket(ua, km);
            (ua - 1.0).max((ua - ub) / dt - bracket)
        })
        .collect())
}

/// State handed to observers.
#[derive(Debug, Clone, Copy)]
pub struct Frame<'a> {
    pub step: u64,
    pub time: f64,
    pub grid: &'a Grid,
    pub values: &'a [f64],
    pub mask: &'a [bool],
    pub saturation_times: &'a [f64],
    pub final_frame: bool,
}

#[derive(Debug, Error, PartialEq)]
#[error("observer `{name}` failed: {message}")]
pub struct ObserverError {
    pub name: String,
    pub message: String,
}

pub trait Observer {
    fn observe(&mut self, frame: &Frame<'_>) -> Result<(), ObserverError>;

    /// Called once after the last frame, and also when a run aborts.
    fn finish(&mut self) -> Result<(), ObserverError> {
        Ok(())
    }
}

/// Records full snapshots in memory.
#[derive(Debug, Clone, Default)]
pub struct SnapshotRecorder {
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub masks: Vec<Vec<bool>>,
}

impl Observer for SnapshotRecorder {
    fn observe(&mut self, frame: &Frame<'_>) -> Result<(), ObserverError> {
        self.times.push(frame.time);
        self.values.push(frame.values.to_vec());
        self.masks.push(frame.mask.to_vec());
        Ok(())
    }
}

/// Extremes of the monitored invariants over a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantReport {
    pub min_value: f64,
    pub max_value: f64,
    /// Cell-steps with `u_{n+1} < u_n`.
    pub monotonicity_violations: u64,
    /// Cell-steps where a saturated cell left the mask.
    pub mask_violations: u64,
    pub rhs_min: f64,
    pub rhs_max: f64,
    /// `L` for the γ-model, `max(L, sup g + sup h_gain)` otherwise.
    pub rhs_bound: f64,
    /// Largest `|Σ(u_{n+1} − u_n) − dt Σ F[u_n]| / dt` (cell volume included),
    /// γ-model only.
    pub mass_defect_max: Option<f64>,
    pub lipschitz_initial: f64,
    pub lipschitz_max: f64,
    /// Largest `Lip(u_n) − (Lip(u_0) + 2 TV) e^{L t_n}`.
    pub lipschitz_excess_max: f64,
    pub kernel_variation: f64,
    pub clamp_count: u64,
}

impl InvariantReport {
    fn new(grid: &Grid, values: &[f64], stencil: &ConvolutionStencil, params: &ModelParams, growth: &GrowthLaw) -> Self {
        let lip = grid.lipschitz(values);
        let (min_value, max_value) = min_max(values);
        Self {
            min_value,
            max_value,
            monotonicity_violations: 0,
            mask_violations: 0,
            rhs_min: f64::INFINITY,
            rhs_max: f64::NEG_INFINITY,
            rhs_bound: match params.model {
                Model::Gamma { .. } => growth.lipschitz,
                _ => growth.singular_rhs_bound(),
            },
            mass_defect_max: matches!(params.model, Model::Gamma { .. }).then_some(0.0),
            lipschitz_initial: lip,
            lipschitz_max: lip,
            lipschitz_excess_max: f64::NEG_INFINITY,
            kernel_variation: stencil.gradient_variation(),
            clamp_count: 0,
        }
    }

    /// Bounds, time monotonicity and mask monotonicity hold exactly.
    pub fn hard_invariants_hold(&self) -> bool {
        self.min_value >= 0.0
            && self.max_value <= 1.0
            && self.monotonicity_violations == 0
            && self.mask_violations == 0
    }

    pub fn rhs_within_bound(&self) -> bool {
        self.rhs_min >= 0.0 && self.rhs_max <= self.rhs_bound * (1.0 + 1e-12)
    }
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Owns the evolving state of one run.
pub struct Simulation<'a> {
    grid: Grid,
    values: Vec<f64>,
    mask: Vec<bool>,
    saturation_times: Vec<f64>,
    params: ModelParams,
    stencil: &'a ConvolutionStencil,
    growth: &'a GrowthLaw,
    step: u64,
    time: f64,
    report: InvariantReport,
    scratch: Vec<f64>,
}

impl<'a> Simulation<'a> {
    pub fn new(
        u0: &GridField,
        params: ModelParams,
        stencil: &'a ConvolutionStencil,
        growth: &'a GrowthLaw,
    ) -> Result<Self, DynamicsError> {
        params.validate(growth)?;
        // Re-check in case the field was assembled by hand.
        GridField::new(u0.grid, u0.values.clone(), u0.time)?;
        if u0.grid.dim() != stencil.dim {
            return Err(KernelError::GridMismatch("stencil and field dimensions differ".into()).into());
        }
        let mask = saturated_mask(&u0.values, params.saturation_eps);
        let saturation_times = mask.iter().map(|&m| if m { u0.time } else { f64::INFINITY }).collect();
        let report = InvariantReport::new(&u0.grid, &u0.values, stencil, &params, growth);
        Ok(Self {
            grid: u0.grid,
            values: u0.values.clone(),
            mask,
            saturation_times,
            params,
            stencil,
            growth,
            step: 0,
            time: u0.time,
            report,
            scratch: Vec::new(),
        })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn saturation_times(&self) -> &[f64] {
        &self.saturation_times
    }

    pub fn report(&self) -> &InvariantReport {
        &self.report
    }

    pub fn field(&self) -> GridField {
        GridField { grid: self.grid, values: self.values.clone(), time: self.time }
    }

    pub fn frame(&self, final_frame: bool) -> Frame<'_> {
        Frame {
            step: self.step,
            time: self.time,
            grid: &self.grid,
            values: &self.values,
            mask: &self.mask,
            saturation_times: &self.saturation_times,
            final_frame,
        }
    }

    /// Advances by `dt` (or less, for a final partial step).
    pub fn advance(&mut self, dt: f64) -> Result<StepStats, DynamicsError> {
        let model_dt = self.params.dt;
        if !(dt > 0.0 && dt <= model_dt * (1.0 + 1e-12)) {
            return Err(param("dt", format!("step {dt} must lie in (0, {model_dt}]")));
        }
        let (rhs, production) = match self.params.model {
            Model::Gamma { gamma } => {
                let (rhs, prod) = gamma_terms(&self.grid, &self.values, self.stencil, self.growth, gamma)?;
                (rhs, Some(prod))
            }
            _ => (rhs_singular_values(&self.grid, &self.values, &self.mask, self.stencil, self.growth)?, None),
        };
        self.scratch.clear();
        self.scratch.extend_from_slice(&self.values);
        let stats = apply_update(&mut self.values, &rhs, dt);
        self.step += 1;
        self.time += dt;

        let r = &mut self.report;
        r.clamp_count += stats.clamped as u64;
        r.rhs_min = r.rhs_min.min(stats.rhs_min);
        r.rhs_max = r.rhs_max.max(stats.rhs_max);
        let mut increment = 0.0;
        for (k, (&new, &old)) in self.values.iter().zip(&self.scratch).enumerate() {
            r.min_value = r.min_value.min(new);
            r.max_value = r.max_value.max(new);
            if new < old {
                r.monotonicity_violations += 1;
            }
            increment += new - old;
            let now = new >= 1.0 - self.params.saturation_eps;
            if self.mask[k] && !now {
                r.mask_violations += 1;
            }
            if now && !self.mask[k] {
                self.mask[k] = true;
                self.saturation_times[k] = self.time;
            }
        }
        if let (Some(defect), Some(production)) = (r.mass_defect_max.as_mut(), production) {
            let cell = self.grid.cell_volume();
            let d = ((increment - dt * production) * cell).abs() / dt;
            *defect = defect.max(d);
        }
        let lip = self.grid.lipschitz(&self.values);
        r.lipschitz_max = r.lipschitz_max.max(lip);
        let bound = (r.lipschitz_initial + 2.0 * r.kernel_variation) * (self.growth.lipschitz * self.time).exp();
        r.lipschitz_excess_max = r.lipschitz_excess_max.max(lip - bound);
        Ok(stats)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Observers see every `observe_every`-th step plus the first and last.
    pub observe_every: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { observe_every: 1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub final_field: GridField,
    pub saturation_times: Vec<f64>,
    pub steps: u64,
    pub invariants: InvariantReport,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("{error} (run stopped at t = {})", partial.final_field.time)]
    Observer { error: ObserverError, partial: Box<RunSummary> },
}

/// Number of steps and the length of the last one for a horizon.
pub fn step_plan(t_end: f64, dt: f64) -> (u64, f64) {
    if t_end <= 0.0 {
        return (0, dt);
    }
    let n = (t_end / dt - 1e-9).ceil().max(1.0) as u64;
    let last = t_end - (n - 1) as f64 * dt;
    (n, last.min(dt))
}

pub fn run(
    u0: &GridField,
    params: ModelParams,
    stencil: &ConvolutionStencil,
    growth: &GrowthLaw,
    observers: &mut [&mut dyn Observer],
    options: RunOptions,
) -> Result<RunSummary, RunError> {
    let mut sim = Simulation::new(u0, params, stencil, growth)?;
    let every = options.observe_every.max(1);
    let (n, last) = step_plan(params.t_end, params.dt);

    let summary = |sim: &Simulation| RunSummary {
        final_field: sim.field(),
        saturation_times: sim.saturation_times.clone(),
        steps: sim.step,
        invariants: sim.report.clone(),
    };
    let notify = |sim: &Simulation, observers: &mut [&mut dyn Observer], final_frame: bool| {
        let frame = sim.frame(final_frame);
        for obs in observers.iter_mut() {
            obs.observe(&frame)?;
        }
        Ok::<(), ObserverError>(())
    };
    let abort = |sim: &Simulation, observers: &mut [&mut dyn Observer], error: ObserverError| {
        for obs in observers.iter_mut() {
            let _ = obs.finish();
        }
        RunError::Observer { error, partial: Box::new(summary(sim)) }
    };

    if let Err(e) = notify(&sim, observers, n == 0) {
        return Err(abort(&sim, observers, e));
    }
    for k in 1..=n {
        let dt = if k == n { last } else { params.dt };
        sim.advance(dt)?;
        if k == n || k % every == 0 {
            if let Err(e) = notify(&sim, observers, k == n) {
                return Err(abort(&sim, observers, e));
            }
        }
    }
    for obs in observers.iter_mut() {
        if let Err(e) = obs.finish() {
            return Err(RunError::Observer { error: e, partial: Box::new(summary(&sim)) });
        }
    }
    Ok(summary(&sim))
}

/// First-saturation time of every cell; `+∞` for cells never saturated.
pub fn saturation_time_map(summary: &RunSummary) -> GridFieldTimes {
    GridFieldTimes { grid: summary.final_field.grid, times: summary.saturation_times.clone() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFieldTimes {
    pub grid: Grid,
    pub times: Vec<f64>,
}

impl GridFieldTimes {
    /// `S(t) = {t₀ ≤ t}`.
    pub fn saturated_at(&self, t: f64) -> Vec<bool> {
        self.times.iter().map(|&t0| t0 <= t).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{build_kernel, KernelKind};

    fn setup(dim: usize) -> (Grid, ConvolutionStencil, GrowthLaw) {
        let dx = 0.1;
        let (_, st) = build_kernel(KernelKind::IndicatorBall, 1.0, dim, dx).unwrap();
        let radius = if dim == 1 { 4.0 } else { 2.5 };
        (Grid::centered_box(dim, radius, dx).unwrap(), st, GrowthLaw::linear(1.0).unwrap())
    }

    fn singular(dt: f64, t_end: f64) -> ModelParams {
        ModelParams { model: Model::Singular, saturation_eps: 0.0, dt, t_end }
    }

    #[test]
    fn constant_field_gamma_rhs() {
        let (grid, st, g) = setup(1);
        let a: f64 = 0.4;
        let f = GridField::constant(grid, a).unwrap();
        let rhs = rhs_gamma(&f, &st, &g, 3.0).unwrap();
        let centre = grid.nearest([0.0, 0.0]);
        let expected = a * (1.0 - a.powi(3));
        assert!((rhs[centre] - expected).abs() < 1e-12);
        for c in [0.0, 1.0] {
            let f = GridField::constant(grid, c).unwrap();
            assert!(rhs_gamma(&f, &st, &g, 3.0).unwrap().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn singular_rhs_examples() {
        let (grid, st, g) = setup(1);
        let centre = grid.nearest([0.0, 0.0]);
        // Saturated everywhere except the centre, which sits at zero.
        let mut v = vec![1.0; grid.len()];
        v[centre] = 0.0;
        let f = GridField::new(grid, v, 0.0).unwrap();
        let rhs = rhs_singular(&f, &st, &g, 0.0).unwrap();
        let w0 = st.weight_at([0, 0]);
        assert!((rhs[centre] - g.g_one * (1.0 - w0)).abs() < 1e-12);
        assert!(rhs.iter().enumerate().all(|(k, &r)| k == centre || r == 0.0));

        let f = GridField::constant(grid, 0.3).unwrap();
        assert!(rhs_singular(&f, &st, &g, 0.0).unwrap().iter().all(|&r| (r - 0.3).abs() < 1e-15));
    }

    #[test]
    fn stability_cap_is_enforced() {
        let (grid, st, g) = setup(1);
        let p = ModelParams { model: Model::Gamma { gamma: 10.0 }, saturation_eps: 0.0, dt: 0.02, t_end: 1.0 };
        assert!(matches!(p.validate(&g), Err(DynamicsError::Parameter { name: "dt", .. })));
        let f = GridField::constant(grid, 0.0).unwrap();
        assert!(step(&f, &p, &st, &g).is_err());
        assert_eq!(singular(0.05, 1.0).stability_cap(&g), 0.05);
        let bad = ModelParams { saturation_eps: 1e-3, ..singular(0.01, 1.0) };
        assert!(matches!(bad.validate(&g), Err(DynamicsError::Parameter { name: "saturation_eps", .. })));
    }

    #[test]
    fn seed_spreads_within_reach_on_first_step() {
        let (grid, st, g) = setup(1);
        let centre = grid.nearest([0.0, 0.0]);
        let mut v = vec![0.0; grid.len()];
        v[centre] = 1.0;
        let f = GridField::new(grid, v.clone(), 0.0).unwrap();
        let (next, _) = step(&f, &singular(0.01, 1.0), &st, &g).unwrap();
        for (k, &v0) in v.iter().enumerate() {
            let x = grid.coords(k)[0].abs();
            if k != centre && x <= 1.0 + 1e-9 {
                assert!(next.values[k] > v0);
            } else if x > 1.0 + 1e-9 {
                assert_eq!(next.values[k], 0.0);
            }
        }
    }

    #[test]
    fn constant_states_are_stationary() {
        let (grid, st, g) = setup(2);
        for c in [0.0, 1.0] {
            let f = GridField::constant(grid, c).unwrap();
            let s = run(&f, singular(0.02, 0.2), &st, &g, &mut [], RunOptions::default()).unwrap();
            assert!(s.final_field.values.iter().all(|&v| v == c));
            let res = obstacle_residual(&f, &s.final_field, 0.2, &st, &g, 0.0).unwrap();
            assert!(res.iter().all(|&r| r == 0.0));
        }
    }

    #[test]
    fn saturation_times_and_monotone_run() {
        let (grid, st, g) = setup(1);
        let u0 = GridField::from_fn(grid, |p| if p[0].abs() <= 0.5 { 1.0 } else { 0.0 }).unwrap();
        let mut rec = SnapshotRecorder::default();
        let s = run(&u0, singular(0.05, 2.0), &st, &g, &mut [&mut rec], RunOptions { observe_every: 5 }).unwrap();
        assert!(s.invariants.hard_invariants_hold());
        assert!(s.invariants.rhs_within_bound());
        assert_eq!(rec.times.len(), 9);
        assert!((s.final_field.time - 2.0).abs() < 1e-12);
        let times = saturation_time_map(&s);
        for k in 0..grid.len() {
            let x = grid.coords(k)[0];
            if x.abs() <= 0.5 {
                assert_eq!(times.times[k], 0.0);
            }
        }
        // Nondecreasing in |x| on the right half.
        let centre = grid.nearest([0.0, 0.0]);
        for k in centre..grid.len() - 1 {
            assert!(times.times[k + 1] >= times.times[k]);
        }
    }

    #[test]
    fn gamma_mass_identity() {
        let (grid, st, g) = setup(1);
        let u0 = GridField::from_fn(grid, |p| (0.9 - p[0].abs()).clamp(0.0, 1.0)).unwrap();
        let params = ModelParams { model: Model::Gamma { gamma: 4.0 }, saturation_eps: 0.0, dt: 0.02, t_end: 0.4 };
        let s = run(&u0, params, &st, &g, &mut [], RunOptions::default()).unwrap();
        assert!(s.invariants.mass_defect_max.unwrap() < 1e-10);
        assert!(s.invariants.rhs_within_bound());
        assert!(s.invariants.lipschitz_excess_max <= 0.0);
    }

    struct Failing(u32);
    impl Observer for Failing {
        fn observe(&mut self, frame: &Frame<'_>) -> Result<(), ObserverError> {
            if frame.step >= 3 {
                return Err(ObserverError { name: "failing".into(), message: "disk full".into() });
            }
            Ok(())
        }
        fn finish(&mut self) -> Result<(), ObserverError> {
            self.0 += 1;
            Ok(())
        }
    }

    #[test]
    fn observer_failure_returns_partial_summary() {
        let (grid, st, g) = setup(1);
        let u0 = GridField::constant(grid, 0.2).unwrap();
        let mut obs = Failing(0);
        let err = run(&u0, singular(0.05, 1.0), &st, &g, &mut [&mut obs], RunOptions::default()).unwrap_err();
        match err {
            RunError::Observer { partial, .. } => assert_eq!(partial.steps, 3),
            other => panic!("unexpected {other}"),
        }
        assert_eq!(obs.0, 1);
    }

    #[test]
    fn step_plan_shortens_last_step() {
        assert_eq!(step_plan(1.0, 0.25), (4, 0.25));
        let (n, last) = step_plan(1.0, 0.3);
        assert_eq!(n, 4);
        assert!((last - 0.1).abs() < 1e-12);
        assert_eq!(step_plan(0.0, 0.1).0, 0);
    }
}
