//! Subcommand drivers.

use std::path::Path;

use serde_json::{json, Value};

use satfront::analysis::{
    comparison_counterexample, comparison_harness, estimate_speed, gamma_convergence_study, AnalysisError,
    CounterexampleConfig, FrontTrack, FrontTracker,
};
use satfront::io::FieldSidecar;
use satfront::{
    find_c_star, run, shoot_profile, ConvolutionStencil, Frame, FrontKernelProfile, Grid, GridField, GrowthLaw,
    InitialData, MinimalSpeedResult, Observer, ObserverError, RunError, RunOptions, RunSummary, WaveError,
    WaveProfile, WaveSampler,
};

use crate::artifacts::Artifacts;
use crate::config::{ConfigError, RunConfig};
use crate::CliError;

/// Result of a subcommand that ran to completion.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub message: String,
    pub warnings: Vec<String>,
}

fn analysis_error(e: AnalysisError) -> CliError {
    match e {
        AnalysisError::Precondition(m) | AnalysisError::InvalidArgument(m) => {
            CliError::Config(ConfigError::Invalid { key: "study".into(), reason: m })
        }
        AnalysisError::Wave(w) => wave_error(w),
        other => CliError::Science(other.to_string()),
    }
}

fn wave_error(e: WaveError) -> CliError {
    match e {
        WaveError::Bracket { c_lo, c_hi, phi_lo, phi_hi } => CliError::Science(format!(
            "no sign change of phi(ell) on [{c_lo}, {c_hi}]: sign {} ({phi_lo:e}) at c_lo, sign {} ({phi_hi:e}) at c_hi",
            sign(phi_lo),
            sign(phi_hi)
        )),
        WaveError::NotMonotoneCap => CliError::Config(ConfigError::Invalid {
            key: "growth".into(),
            reason: "the wave solver needs monotone_cap (g(u) <= g(1) on [0, 1])".into(),
        }),
        WaveError::GainUnsupported => CliError::Config(ConfigError::Invalid {
            key: "growth.gain".into(),
            reason: "traveling waves are computed for the standard saturated model only".into(),
        }),
        other => CliError::Config(ConfigError::Invalid { key: "study".into(), reason: other.to_string() }),
    }
}

fn sign(x: f64) -> &'static str {
    if x > 0.0 {
        "+"
    } else if x < 0.0 {
        "-"
    } else {
        "0"
    }
}

fn run_error(e: RunError, dir: &Path) -> CliError {
    match e {
        RunError::Observer { error, .. } => CliError::io(dir, error),
        RunError::Dynamics(d) => CliError::Config(ConfigError::Invalid { key: "model".into(), reason: d.to_string() }),
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report is serialisable")
}

/// Kernel, stencil, growth law and `h`, shared by every subcommand.
struct Setup {
    stencil: ConvolutionStencil,
    growth: GrowthLaw,
    front: FrontKernelProfile,
}

impl Setup {
    fn new(config: &RunConfig) -> Result<Self, CliError> {
        let growth = config.growth_law()?;
        let (kernel, stencil) = config.kernel()?;
        let front = config.front(&kernel)?;
        Ok(Self { stencil, growth, front })
    }

    fn c_star(&self, config: &RunConfig) -> Result<MinimalSpeedResult, CliError> {
        find_c_star(&self.growth, &self.front, config.study.wave_tolerance).map_err(wave_error)
    }

    fn initial(&self, config: &RunConfig, data: &InitialData, grid: Grid, key: &str) -> Result<GridField, CliError> {
        let profile = match *data {
            InitialData::WaveEnvelope { offset, speed_factor, .. } => {
                let wave = self.c_star(config)?;
                let reach = 2.0 * config.domain()?.box_radius + offset.abs() + 2.0 * self.front.ell;
                let p = if speed_factor == 1.0 {
                    wave.profile(&self.growth, &self.front, reach)
                } else {
                    shoot_profile(speed_factor * wave.c_star, &self.growth, &self.front, reach, wave.ode_step)
                };
                Some(p.map_err(wave_error)?)
            }
            _ => None,
        };
        data.sample(grid, profile.as_ref())
            .map_err(|e| CliError::Config(ConfigError::Invalid { key: key.into(), reason: e.to_string() }))
    }
}

/// Writes every observed frame as a CSV and keeps an index of them.
struct SnapshotWriter<'a> {
    artifacts: &'a mut Artifacts,
    index: Vec<[f64; 3]>,
}

impl Observer for SnapshotWriter<'_> {
    fn observe(&mut self, frame: &Frame<'_>) -> Result<(), ObserverError> {
        let k = self.index.len();
        self.index.push([k as f64, frame.step as f64, frame.time]);
        let name = format!("snapshots/u_{k:06}.csv");
        write_field(self.artifacts, &name, frame.grid, frame.values, "u", frame.time)
            .map_err(|e| ObserverError { name: "snapshots".into(), message: e.to_string() })
    }

    fn finish(&mut self) -> Result<(), ObserverError> {
        let index = std::mem::take(&mut self.index);
        self.artifacts
            .csv("snapshots/index.csv", &["snapshot", "step", "time"], index)
            .map_err(|e| ObserverError { name: "snapshots".into(), message: e.to_string() })
    }
}

/// 1D fields as `x,value` rows; 2D fields as one row-major column with a
/// JSON sidecar carrying the geometry.
fn write_field(
    art: &mut Artifacts,
    name: &str,
    grid: &Grid,
    values: &[f64],
    column: &str,
    time: f64,
) -> Result<(), CliError> {
    if grid.dim() == 1 {
        art.csv(name, &["x", column], (0..grid.len()).map(|k| [grid.coords(k)[0], values[k]]))
    } else {
        art.csv(name, &[column], values.iter().map(|&v| [v]))?;
        let sidecar = FieldSidecar::new(grid, time, column);
        art.json(&name.replace(".csv", ".json"), json!({ "field": to_value(&sidecar) }))
    }
}

fn write_track(art: &mut Artifacts, track: &FrontTrack) -> Result<(), CliError> {
    let rows = (0..track.len()).map(|k| [track.times[k], track.radius_saturated[k], track.radius_support[k]]);
    art.csv("front.csv", &["time", "radius_saturated", "radius_support"], rows)
}

struct Simulated {
    summary: RunSummary,
    track: FrontTrack,
    grid: Grid,
    warnings: Vec<String>,
}

fn simulate(config: &RunConfig, setup: &Setup, art: &mut Artifacts, snapshots: bool) -> Result<Simulated, CliError> {
    let params = config.params(&setup.growth)?;
    let grid = config.grid()?;
    let u0 = setup.initial(config, &config.domain()?.initial, grid, "domain.initial")?;
    let warnings: Vec<String> = config.truncation_warning(&setup.growth, params.t_end).into_iter().collect();
    let mut tracker = FrontTracker::new(None);
    let options = RunOptions { observe_every: config.output.snapshot_every };
    let dir = art.dir().to_path_buf();
    let summary = if snapshots {
        let mut writer = SnapshotWriter { artifacts: art, index: Vec::new() };
        let mut obs: [&mut dyn Observer; 2] = [&mut writer, &mut tracker];
        run(&u0, params, &setup.stencil, &setup.growth, &mut obs, options)
    } else {
        let mut obs: [&mut dyn Observer; 1] = [&mut tracker];
        run(&u0, params, &setup.stencil, &setup.growth, &mut obs, options)
    }
    .map_err(|e| run_error(e, &dir))?;
    Ok(Simulated { summary, track: tracker.track, grid, warnings })
}

pub fn cmd_simulate(config: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let setup = Setup::new(config)?;
    let mut art = Artifacts::new(out, config);
    let sim = simulate(config, &setup, &mut art, true)?;
    let s = &sim.summary;
    write_field(&mut art, "final.csv", &sim.grid, &s.final_field.values, "u", s.final_field.time)?;
    write_field(&mut art, "saturation_times.csv", &sim.grid, &s.saturation_times, "saturation_time", s.final_field.time)?;
    write_track(&mut art, &sim.track)?;
    let inv = &s.invariants;
    let passed = inv.hard_invariants_hold();
    art.json(
        "invariants.json",
        json!({
            "steps": s.steps,
            "final_time": s.final_field.time,
            "invariants": to_value(inv),
            "hard_invariants_hold": passed,
            "rhs_within_bound": inv.rhs_within_bound(),
            "warnings": sim.warnings,
        }),
    )?;
    let message = format!(
        "{} steps to t = {}; u in [{}, {}], {} monotonicity and {} mask violations",
        s.steps, s.final_field.time, inv.min_value, inv.max_value, inv.monotonicity_violations, inv.mask_violations
    );
    Ok(Outcome { passed, message, warnings: sim.warnings })
}

fn profile_rows(sampler: &WaveSampler) -> impl Iterator<Item = [f64; 2]> + '_ {
    sampler.profile.samples().map(move |(s, _)| [s, sampler.value_at_coordinate(s)])
}

/// Speeds sampled between the analytic bounds for the `φ_c(ℓ)` table.
const SCAN_POINTS: usize = 32;

pub fn cmd_wave(config: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let setup = Setup::new(config)?;
    if !setup.growth.monotone_cap {
        return Err(wave_error(WaveError::NotMonotoneCap));
    }
    let mut art = Artifacts::new(out, config);
    art.csv("front_profile.csv", &["s", "h"], setup.front.samples().map(|(s, h)| [s, h]))?;
    let wave = setup.c_star(config)?;
    let s_max = config.study.wave_extent * setup.front.ell;
    let mut profiles: Vec<(String, WaveProfile)> = Vec::new();
    profiles.push(("c_star".into(), wave.profile(&setup.growth, &setup.front, s_max).map_err(wave_error)?));
    for (label, factor) in [("1.5c_star", 1.5), ("2c_star", 2.0)] {
        let p = shoot_profile(factor * wave.c_star, &setup.growth, &setup.front, s_max, wave.ode_step)
            .map_err(wave_error)?;
        profiles.push((label.into(), p));
    }
    let mut listed = Vec::new();
    for (label, p) in &profiles {
        let sampler = satfront::export_wave(p, [1.0, 0.0], 0.0).map_err(wave_error)?;
        let name = format!("profile_{label}.csv");
        art.csv(&name, &["s", "phi"], profile_rows(&sampler))?;
        let last_positive = profile_rows(&sampler).filter(|r| r[1] > 0.0).map(|r| r[0]).fold(f64::NEG_INFINITY, f64::max);
        listed.push(json!({
            "file": name,
            "c": p.c,
            "phi_at_ell": p.phi_at_ell,
            "last_positive_s": last_positive,
            "minimal": p.minimal,
        }));
    }
    let (lo, hi) = wave.analytic_bounds;
    let mut scan = Vec::with_capacity(SCAN_POINTS + 1);
    for k in 0..=SCAN_POINTS {
        let c = lo + (hi - lo) * k as f64 / SCAN_POINTS as f64;
        let p = shoot_profile(c, &setup.growth, &setup.front, setup.front.ell, wave.ode_step).map_err(wave_error)?;
        scan.push([c, p.phi_at_ell]);
    }
    art.csv("phi_at_ell.csv", &["c", "phi_at_ell"], scan)?;
    let in_bounds = wave.c_star >= lo && wave.c_star <= hi;
    art.json(
        "wave.json",
        json!({
            "minimal_speed": to_value(&wave),
            "profiles": listed,
            "front_integral_0_ell": setup.front.integral_0_ell(),
        }),
    )?;
    Ok(Outcome {
        passed: in_bounds && wave.positive_on_support,
        message: format!("c* = {} in [{lo}, {hi}] after {} bisections", wave.c_star, wave.iterations),
        warnings: Vec::new(),
    })
}

pub fn cmd_speed(config: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let setup = Setup::new(config)?;
    if !setup.growth.monotone_cap {
        return Err(wave_error(WaveError::NotMonotoneCap));
    }
    let wave = setup.c_star(config)?;
    let mut art = Artifacts::new(out, config);
    let sim = simulate(config, &setup, &mut art, false)?;
    write_track(&mut art, &sim.track)?;
    if !sim.summary.invariants.hard_invariants_hold() {
        return Err(CliError::Science(format!("hard invariants violated: {:?}", sim.summary.invariants)));
    }
    let est = estimate_speed(&sim.track, config.study.window_fraction, Some(wave.c_star)).map_err(analysis_error)?;
    let ratio = est.fitted_speed / wave.c_star;
    let passed = !est.degenerate && (ratio - 1.0).abs() <= config.study.speed_tolerance;
    art.json(
        "speed.json",
        json!({
            "estimate": to_value(&est),
            "ratio": ratio,
            "minimal_speed": to_value(&wave),
            "steps": sim.summary.steps,
            "warnings": sim.warnings,
        }),
    )?;
    Ok(Outcome {
        passed,
        message: format!("fitted speed {} vs c* {} (ratio {ratio})", est.fitted_speed, wave.c_star),
        warnings: sim.warnings,
    })
}

pub fn cmd_converge(config: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let setup = Setup::new(config)?;
    let horizon = match config.study.horizon {
        Some(h) if h.is_finite() && h > 0.0 => h,
        Some(h) => {
            return Err(ConfigError::Invalid { key: "study.horizon".into(), reason: format!("must be positive, got {h}") }
                .into())
        }
        None => config.t_end()?,
    };
    let grid = config.grid()?;
    let u0 = setup.initial(config, &config.domain()?.initial, grid, "domain.initial")?;
    let warnings: Vec<String> = config.truncation_warning(&setup.growth, horizon).into_iter().collect();
    let study = gamma_convergence_study(
        &u0,
        &config.study.gamma_list,
        horizon,
        &setup.stencil,
        &setup.growth,
        config.study.threshold,
    )
    .map_err(|e| match e {
        AnalysisError::InvalidArgument(m) => {
            CliError::Config(ConfigError::Invalid { key: "study.gamma_list".into(), reason: m })
        }
        other => analysis_error(other),
    })?;
    let mut art = Artifacts::new(out, config);
    art.csv("converge.csv", &["gamma", "distance"], study.rows.iter().map(|r| [r.gamma, r.distance]))?;
    art.json("converge.json", json!({ "study": to_value(&study), "warnings": warnings }))?;
    let list: Vec<String> = study.rows.iter().map(|r| format!("{}: {:e}", r.gamma, r.distance)).collect();
    Ok(Outcome {
        passed: study.passes,
        message: format!(
            "distances at T = {horizon} ({}); strictly decreasing: {}",
            list.join(", "),
            study.strictly_decreasing
        ),
        warnings,
    })
}

pub fn cmd_compare(config: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    if config.study.counterexample {
        return counterexample(config, out);
    }
    let setup = Setup::new(config)?;
    let domain = config.domain()?;
    let high = domain.initial_high.as_ref().ok_or_else(|| ConfigError::Missing("domain.initial_high".into()))?;
    let params = config.params(&setup.growth)?;
    let grid = config.grid()?;
    let low = setup.initial(config, &domain.initial, grid, "domain.initial")?;
    let high = setup.initial(config, high, grid, "domain.initial_high")?;
    let warnings: Vec<String> = config.truncation_warning(&setup.growth, params.t_end).into_iter().collect();
    let report = comparison_harness(&low, &high, params, &setup.stencil, &setup.growth).map_err(analysis_error)?;
    let mut art = Artifacts::new(out, config);
    art.json("compare.json", json!({ "comparison": to_value(&report), "warnings": warnings }))?;
    Ok(Outcome {
        passed: report.passes,
        message: format!("max ordering violation {:e} over {} steps", report.max_violation, report.steps),
        warnings,
    })
}

fn counterexample(config: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let growth = config.growth_law()?;
    let k = &config.kernel;
    let invalid = |key: &str, reason: &str| CliError::Config(ConfigError::Invalid { key: key.into(), reason: reason.into() });
    if k.dim != 1 {
        return Err(invalid("kernel.dim", "the counterexample runs on a line"));
    }
    let cells = k.ell / k.dx;
    if (cells - cells.round()).abs() > 1e-9 || (cells.round() as usize) % 2 == 0 {
        return Err(invalid("kernel.dx", "ell / dx must be an odd integer for the counterexample"));
    }
    let defaults = CounterexampleConfig::default();
    let setup = CounterexampleConfig {
        ell: k.ell,
        cells_per_ell: cells.round() as usize,
        u0: config.study.counterexample_u0,
        horizon: config.t_end()?,
        dt: config.model.dt.unwrap_or(defaults.dt),
        box_radius: config.domain.as_ref().map_or(defaults.box_radius, |d| d.box_radius / k.ell),
    };
    let report = comparison_counterexample(&setup, &growth).map_err(analysis_error)?;
    let mut art = Artifacts::new(out, config);
    art.json("compare.json", json!({ "counterexample": to_value(&report), "setup": to_value(&setup) }))?;
    Ok(Outcome {
        passed: report.passes,
        message: format!(
            "ordering {} at x = ell/2 (first crossing {:?}); RHS gap {} vs {}",
            if report.first_crossing_time.is_some() { "broken" } else { "kept" },
            report.first_crossing_time,
            report.rhs_gap,
            report.analytic_gap
        ),
        warnings: Vec::new(),
    })
}
