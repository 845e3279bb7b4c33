//! Named initial-data presets.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{Grid, GridError, GridField};
use crate::waves::{export_wave, WaveProfile};

#[derive(Debug, Error, PartialEq)]
pub enum InitialError {
    #[error("initial data parameter `{name}` is invalid: {reason}")]
    Parameter { name: &'static str, reason: String },
    #[error("the wave_envelope preset needs a wave profile")]
    MissingProfile,
    #[error(transparent)]
    Grid(#[from] GridError),
}

fn bad(name: &'static str, reason: impl Into<String>) -> InitialError {
    InitialError::Parameter { name, reason: reason.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// `value` on `B_radius`, decreasing linearly to 0 over `ramp`.
    BallPlateau {
        radius: f64,
        #[serde(default = "one")]
        value: f64,
        #[serde(default)]
        ramp: f64,
    },
    /// Gaussian shifted and rescaled so that it vanishes at `cutoff`.
    GaussianBump {
        amplitude: f64,
        width: f64,
        cutoff: f64,
    },
    /// Planar profile `φ(x·e − offset)` at a speed chosen by the caller.
    WaveEnvelope {
        #[serde(default = "unit_x")]
        direction: [f64; 2],
        offset: f64,
        /// Multiple of `c*` at which the profile is computed.
        #[serde(default = "one")]
        speed_factor: f64,
    },
    Constant {
        value: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn unit_x() -> [f64; 2] {
    [1.0, 0.0]
}

impl InitialData {
    pub fn validate(&self) -> Result<(), InitialError> {
        let unit = |name, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(bad(name, format!("must lie in [0, 1], got {v}")))
            }
        };
        let nonneg = |name, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(bad(name, format!("must be nonnegative, got {v}")))
            }
        };
        match *self {
            InitialData::BallPlateau { radius, value, ramp } => {
                nonneg("radius", radius)?;
                nonneg("ramp", ramp)?;
                unit("value", value)
            }
            InitialData::GaussianBump { amplitude, width, cutoff } => {
                unit("amplitude", amplitude)?;
                if !(width > 0.0) {
                    return Err(bad("width", format!("must be positive, got {width}")));
                }
                if !(cutoff > 0.0) {
                    return Err(bad("cutoff", format!("must be positive, got {cutoff}")));
                }
                Ok(())
            }
            InitialData::WaveEnvelope { direction, speed_factor, offset } => {
                if ((direction[0].hypot(direction[1])) - 1.0).abs() > 1e-9 {
                    return Err(bad("direction", "must be a unit vector"));
                }
                if !(speed_factor >= 1.0) {
                    return Err(bad("speed_factor", format!("must be at least 1, got {speed_factor}")));
                }
                if !offset.is_finite() {
                    return Err(bad("offset", "must be finite"));
                }
                Ok(())
            }
            InitialData::Constant { value } => unit("value", value),
        }
    }

    /// Radius of the smallest origin-centred ball containing the support
    /// (`∞` for non-compact data).
    pub fn support_radius(&self) -> f64 {
        match *self {
            InitialData::BallPlateau { radius, value, ramp } => {
                if value > 0.0 {
                    radius + ramp
                } else {
                    0.0
                }
            }
            InitialData::GaussianBump { amplitude, cutoff, .. } => {
                if amplitude > 0.0 {
                    cutoff
                } else {
                    0.0
                }
            }
            InitialData::WaveEnvelope { .. } => f64::INFINITY,
            InitialData::Constant { value } => {
                if value > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
        }
    }

    pub fn value_at(&self, x: [f64; 2]) -> f64 {
        let r = x[0].hypot(x[1]);
        match *self {
            InitialData::BallPlateau { radius, value, ramp } => {
                if r <= radius {
                    value
                } else if ramp > 0.0 && r < radius + ramp {
                    value * (1.0 - (r - radius) / ramp)
                } else {
                    0.0
                }
            }
            InitialData::GaussianBump { amplitude, width, cutoff } => {
                if r >= cutoff {
                    return 0.0;
                }
                let base = (-0.5 * (cutoff / width).powi(2)).exp();
                let v = (-0.5 * (r / width).powi(2)).exp();
                (amplitude * (v - base) / (1.0 - base)).clamp(0.0, 1.0)
            }
            InitialData::Constant { value } => value,
            InitialData::WaveEnvelope { .. } => f64::NAN,
        }
    }

    pub fn sample(&self, grid: Grid, wave: Option<&WaveProfile>) -> Result<GridField, InitialError> {
        self.validate()?;
        match *self {
            InitialData::WaveEnvelope { direction, offset, .. } => {
                let profile = wave.ok_or(InitialError::MissingProfile)?;
                let sampler = export_wave(profile, direction, offset).map_err(|e| bad("direction", e.to_string()))?;
                Ok(GridField::from_fn(grid, |x| sampler.value(x))?)
            }
            _ => Ok(GridField::from_fn(grid, |x| self.value_at(x))?),
        }
    }
}
