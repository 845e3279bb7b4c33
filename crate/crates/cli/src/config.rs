//! Run configuration: TOML sections, defaults and validation.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use satfront::growth::RateFn;
use satfront::{
    build_kernel_with, front_profile, ConvolutionStencil, FrontKernelProfile, Grid, GrowthLaw, InitialData, Kernel,
    KernelKind, Model, ModelParams, RadialProfile, StencilQuadrature, Tabulated,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Read { path: String, message: String },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error("missing required key `{0}`")]
    Missing(String),
}

fn invalid(key: impl Into<String>, reason: impl ToString) -> ConfigError {
    ConfigError::Invalid { key: key.into(), reason: reason.to_string() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Gamma,
    Singular,
    GeneralizedSingular,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default = "default_model_kind")]
    pub kind: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Defaults to the stability cap.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub saturation_eps: f64,
}

fn default_model_kind() -> ModelKind {
    ModelKind::Singular
}

impl Default for ModelSection {
    fn default() -> Self {
        Self { kind: ModelKind::Singular, gamma: None, dt: None, t_end: None, saturation_eps: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelChoice {
    IndicatorBall,
    CustomRadial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureChoice {
    Midpoint,
    CellAverage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    pub kind: KernelChoice,
    pub ell: f64,
    pub dim: usize,
    pub dx: f64,
    #[serde(default = "default_quadrature")]
    pub quadrature: QuadratureChoice,
    /// `(ρ, K(ρ))` knots for `custom_radial`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<Vec<[f64; 2]>>,
    /// Sample spacing of `h`; defaults to `ell / 1000`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub front_spacing: Option<f64>,
}

fn default_quadrature() -> QuadratureChoice {
    QuadratureChoice::Midpoint
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateKind {
    Linear,
    Logistic,
    Constant,
    Tabulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateSection {
    pub kind: RateKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthSection {
    pub kind: RateKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Vec<f64>>,
    /// When given, must agree with the property measured on the law.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monotone_cap: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain: Option<RateSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub box_radius: f64,
    /// Half-cell-offset lattice (a cell face at the origin).
    #[serde(default)]
    pub staggered: bool,
    pub initial: InitialData,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_high: Option<InitialData>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Output directory; `--out` takes precedence. Not embedded in artifacts.
    #[serde(default, skip_serializing)]
    pub dir: Option<String>,
    /// Steps between snapshots.
    #[serde(default = "default_every")]
    pub snapshot_every: u64,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_every() -> u64 {
    1
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: None, snapshot_every: 1, formats: default_formats() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    /// Bisection tolerance on `c*`.
    #[serde(default = "default_wave_tolerance")]
    pub wave_tolerance: f64,
    /// Length of exported wave profiles, in units of `ell`.
    #[serde(default = "default_wave_extent")]
    pub wave_extent: f64,
    /// Fraction of the run used by the speed fit.
    #[serde(default = "default_window")]
    pub window_fraction: f64,
    /// Pass band for `|fitted / c* − 1|`.
    #[serde(default = "default_speed_tolerance")]
    pub speed_tolerance: f64,
    #[serde(default = "default_gammas")]
    pub gamma_list: Vec<f64>,
    /// Horizon of the γ study; defaults to `model.t_end`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    /// Largest admissible distance for the stiffest γ.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// Run the growth-bump experiment in `compare` instead of an ordered pair.
    #[serde(default)]
    pub counterexample: bool,
    #[serde(default = "default_counter_u0")]
    pub counterexample_u0: f64,
}

fn default_wave_tolerance() -> f64 {
    satfront::waves::DEFAULT_TOLERANCE
}
fn default_wave_extent() -> f64 {
    4.0
}
fn default_window() -> f64 {
    0.5
}
fn default_speed_tolerance() -> f64 {
    0.05
}
fn default_gammas() -> Vec<f64> {
    vec![8.0, 32.0, 128.0, 512.0]
}
fn default_threshold() -> f64 {
    0.01
}
fn default_counter_u0() -> f64 {
    0.6
}

impl Default for StudySection {
    fn default() -> Self {
        Self {
            wave_tolerance: default_wave_tolerance(),
            wave_extent: default_wave_extent(),
            window_fraction: default_window(),
            speed_tolerance: default_speed_tolerance(),
            gamma_list: default_gammas(),
            horizon: None,
            threshold: default_threshold(),
            counterexample: false,
            counterexample_u0: default_counter_u0(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub model: ModelSection,
    pub kernel: KernelSection,
    pub growth: GrowthSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainSection>,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub study: StudySection,
    /// Reserved for randomized suites; recorded but unused by the studies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string().trim_end().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError::Read { path: path.display().to_string(), message: e.to_string() })?;
        Self::from_toml(&text)
    }

    /// Resolved configuration as embedded in artifacts.
    pub fn resolved_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config is serialisable")
    }

    pub fn growth_law(&self) -> Result<GrowthLaw, ConfigError> {
        let gs = &self.growth;
        let section = RateSection {
            kind: gs.kind,
            rate: gs.rate,
            capacity: gs.capacity,
            value: gs.value,
            u: gs.u.clone(),
            g: gs.g.clone(),
        };
        let rate = rate_fn(&section, "growth")?;
        let gain = self.growth.gain.as_ref().map(|g| rate_fn(g, "growth.gain")).transpose()?;
        let law = GrowthLaw::new(rate, gain).map_err(|e| invalid("growth", e))?;
        if let Some(claimed) = self.growth.monotone_cap {
            if claimed != law.monotone_cap {
                return Err(invalid(
                    "growth.monotone_cap",
                    format!("declared {claimed} but the law gives {}", law.monotone_cap),
                ));
            }
        }
        Ok(law)
    }

    pub fn kernel(&self) -> Result<(Kernel, ConvolutionStencil), ConfigError> {
        let k = &self.kernel;
        let kind = match (k.kind, &k.profile) {
            (KernelChoice::IndicatorBall, None) => KernelKind::IndicatorBall,
            (KernelChoice::IndicatorBall, Some(_)) => {
                return Err(invalid("kernel.profile", "only used with kind = \"custom_radial\""))
            }
            (KernelChoice::CustomRadial, Some(points)) => {
                let pts: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
                KernelKind::CustomRadial(RadialProfile::new(&pts).map_err(|e| invalid("kernel.profile", e))?)
            }
            (KernelChoice::CustomRadial, None) => return Err(ConfigError::Missing("kernel.profile".into())),
        };
        let quadrature = match k.quadrature {
            QuadratureChoice::Midpoint => StencilQuadrature::Midpoint,
            QuadratureChoice::CellAverage => StencilQuadrature::CellAverage,
        };
        build_kernel_with(kind, k.ell, k.dim, k.dx, quadrature).map_err(|e| invalid(kernel_key(&e), e))
    }

    pub fn front(&self, kernel: &Kernel) -> Result<FrontKernelProfile, ConfigError> {
        let spacing = self.kernel.front_spacing.unwrap_or(self.kernel.ell / 1000.0);
        front_profile(kernel, spacing).map_err(|e| invalid("kernel.front_spacing", e))
    }

    pub fn model(&self) -> Result<Model, ConfigError> {
        let m = &self.model;
        match (m.kind, m.gamma) {
            (ModelKind::Gamma, Some(gamma)) => Ok(Model::Gamma { gamma }),
            (ModelKind::Gamma, None) => Err(ConfigError::Missing("model.gamma".into())),
            (_, Some(_)) => Err(invalid("model.gamma", "only used with kind = \"gamma\"")),
            (ModelKind::Singular, None) => Ok(Model::Singular),
            (ModelKind::GeneralizedSingular, None) => Ok(Model::GeneralizedSingular),
        }
    }

    pub fn t_end(&self) -> Result<f64, ConfigError> {
        match self.model.t_end {
            Some(t) if t.is_finite() && t > 0.0 => Ok(t),
            Some(t) => Err(invalid("model.t_end", format!("must be positive, got {t}"))),
            None => Err(ConfigError::Missing("model.t_end".into())),
        }
    }

    /// Validated time-stepping parameters for `model`.
    pub fn params_for(&self, model: Model, growth: &GrowthLaw, t_end: f64) -> Result<ModelParams, ConfigError> {
        let dt = self.model.dt.unwrap_or_else(|| satfront::stability_cap(&model, growth));
        let params = ModelParams { model, saturation_eps: self.model.saturation_eps, dt, t_end };
        params.validate(growth).map_err(|e| match e {
            satfront::DynamicsError::Parameter { name, reason } => {
                let key = if name == "gain" { "growth.gain".to_string() } else { format!("model.{name}") };
                ConfigError::Invalid { key, reason }
            }
            other => invalid("model", other),
        })?;
        Ok(params)
    }

    pub fn params(&self, growth: &GrowthLaw) -> Result<ModelParams, ConfigError> {
        self.params_for(self.model()?, growth, self.t_end()?)
    }

    pub fn domain(&self) -> Result<&DomainSection, ConfigError> {
        self.domain.as_ref().ok_or_else(|| ConfigError::Missing("domain".into()))
    }

    pub fn grid(&self) -> Result<Grid, ConfigError> {
        let d = self.domain()?;
        let k = &self.kernel;
        let grid = if d.staggered {
            Grid::staggered_box(k.dim, d.box_radius, k.dx)
        } else {
            Grid::centered_box(k.dim, d.box_radius, k.dx)
        };
        grid.map_err(|e| invalid("domain.box_radius", e))
    }

    /// Checks purely syntactic constraints shared by all subcommands.
    pub fn validate_common(&self) -> Result<(), ConfigError> {
        if self.output.snapshot_every == 0 {
            return Err(invalid("output.snapshot_every", "must be at least 1"));
        }
        if self.output.formats.is_empty() {
            return Err(invalid("output.formats", "must list at least one of \"csv\", \"json\""));
        }
        let s = &self.study;
        if !(s.wave_tolerance > 0.0) {
            return Err(invalid("study.wave_tolerance", "must be positive"));
        }
        if !(s.wave_extent >= 1.0) {
            return Err(invalid("study.wave_extent", "must be at least 1"));
        }
        if !(s.window_fraction > 0.0 && s.window_fraction <= 0.5) {
            return Err(invalid("study.window_fraction", "must lie in (0, 0.5]"));
        }
        if !(s.speed_tolerance > 0.0) {
            return Err(invalid("study.speed_tolerance", "must be positive"));
        }
        if !(s.threshold > 0.0) {
            return Err(invalid("study.threshold", "must be positive"));
        }
        if let Some(d) = &self.domain {
            d.initial.validate().map_err(|e| invalid("domain.initial", e))?;
            if let Some(h) = &d.initial_high {
                h.validate().map_err(|e| invalid("domain.initial_high", e))?;
            }
        }
        Ok(())
    }

    pub fn writes(&self, format: Format) -> bool {
        self.output.formats.contains(&format)
    }

    /// Truncation warning when the box may be reached before `t_end`:
    /// needs `box ≥ support + ℓ + ℓ sup g · t_end`.
    pub fn truncation_warning(&self, growth: &GrowthLaw, t_end: f64) -> Option<String> {
        let d = self.domain.as_ref()?;
        let ell = self.kernel.ell;
        let support = d.initial.support_radius().max(d.initial_high.as_ref().map_or(0.0, |h| h.support_radius()));
        let needed = support + ell + ell * growth.sup * t_end;
        (d.box_radius < needed).then(|| {
            format!(
                "domain.box_radius = {} is below support + ell + ell*sup(g)*t_end = {needed}; the front may reach the box edge",
                d.box_radius
            )
        })
    }
}

fn kernel_key(e: &satfront::KernelError) -> &'static str {
    use satfront::KernelError as E;
    match e {
        E::InvalidRadius(_) => "kernel.ell",
        E::InvalidDimension(_) => "kernel.dim",
        E::InvalidSpacing(_) | E::TooCoarse { .. } => "kernel.dx",
        _ => "kernel.profile",
    }
}

fn rate_fn(s: &RateSection, key: &str) -> Result<RateFn, ConfigError> {
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| ConfigError::Missing(format!("{key}.{name}")));
    let reject = |present: bool, name: &str| {
        if present {
            Err(invalid(format!("{key}.{name}"), format!("not used by kind = \"{}\"", kind_name(s.kind))))
        } else {
            Ok(())
        }
    };
    let tab = s.u.is_some() || s.g.is_some();
    Ok(match s.kind {
        RateKind::Linear => {
            reject(s.capacity.is_some(), "capacity")?;
            reject(s.value.is_some(), "value")?;
            reject(tab, "u")?;
            RateFn::Linear { rate: need(s.rate, "rate")? }
        }
        RateKind::Logistic => {
            reject(s.value.is_some(), "value")?;
            reject(tab, "u")?;
            RateFn::Logistic { rate: need(s.rate, "rate")?, capacity: need(s.capacity, "capacity")? }
        }
        RateKind::Constant => {
            reject(s.rate.is_some(), "rate")?;
            reject(s.capacity.is_some(), "capacity")?;
            reject(tab, "u")?;
            RateFn::Constant { value: need(s.value, "value")? }
        }
        RateKind::Tabulated => {
            reject(s.rate.is_some(), "rate")?;
            reject(s.capacity.is_some(), "capacity")?;
            reject(s.value.is_some(), "value")?;
            let u = s.u.clone().ok_or_else(|| ConfigError::Missing(format!("{key}.u")))?;
            let g = s.g.clone().ok_or_else(|| ConfigError::Missing(format!("{key}.g")))?;
            RateFn::Tabulated(Tabulated::new(u, g).map_err(|e| invalid(format!("{key}.g"), e))?)
        }
    })
}

fn kind_name(k: RateKind) -> &'static str {
    match k {
        RateKind::Linear => "linear",
        RateKind::Logistic => "logistic",
        RateKind::Constant => "constant",
        RateKind::Tabulated => "tabulated",
    }
}
