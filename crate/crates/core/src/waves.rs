//! Traveling-wave profiles by shooting and the minimal speed `c*` by
//! bisection on the sign of `φ_c(ℓ)`.

use serde::Serialize;
use thiserror::Error;

use crate::growth::GrowthLaw;
use crate::kernel::FrontKernelProfile;

#[derive(Debug, Error, PartialEq)]
pub enum WaveError {
    #[error("wave speed must be positive and finite, got {0}")]
    InvalidSpeed(f64),
    #[error("ODE step {step} too large (need <= ell/200 = {max})")]
    StepTooLarge { step: f64, max: f64 },
    #[error("s_max = {s_max} must be at least ell = {ell}")]
    ShortDomain { s_max: f64, ell: f64 },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("growth law violates g(u) <= g(1); the minimal speed is not characterised")]
    NotMonotoneCap,
    #[error("the shooting problem is defined for the standard saturated model (no gain law)")]
    GainUnsupported,
    #[error(
        "bracket failure: phi(ell) = {phi_lo:e} at c_lo = {c_lo} (expected < 0), {phi_hi:e} at c_hi = {c_hi} (expected > 0)"
    )]
    Bracket { c_lo: f64, c_hi: f64, phi_lo: f64, phi_hi: f64 },
    #[error("need 0 < c0 <= c1, got c0 = {c0}, c1 = {c1}")]
    SpeedOrder { c0: f64, c1: f64 },
}

/// `φ_c` sampled at `s_k = k·step`, `k = 0..`, with `φ = 1` for `s ≤ 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveProfile {
    pub c: f64,
    pub ell: f64,
    pub step: f64,
    pub values: Vec<f64>,
    pub phi_at_ell: f64,
    pub sign_at_ell: i8,
    /// Set for the profile at `c*`, whose positivity set ends at `ℓ`.
    pub minimal: bool,
}

impl WaveProfile {
    pub fn s_max(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.step
    }

    /// Index of the sample at `s = ℓ`.
    pub fn ell_index(&self) -> usize {
        (self.ell / self.step).round() as usize
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().enumerate().map(|(k, &v)| (k as f64 * self.step, v))
    }

    /// Linear interpolation, `1` for `s ≤ 0` and the last value past `s_max`.
    pub fn eval(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 1.0;
        }
        let t = s / self.step;
        let n = self.values.len();
        if t >= (n - 1) as f64 {
            return self.values[n - 1];
        }
        let k = t.floor() as usize;
        let w = t - k as f64;
        self.values[k] + w * (self.values[k + 1] - self.values[k])
    }
}

fn check_growth(growth: &GrowthLaw) -> Result<(), WaveError> {
    if growth.gain.is_some() {
        return Err(WaveError::GainUnsupported);
    }
    Ok(())
}

/// Classical fourth-order integration of `−cφ′ = g(φ) + (g(1) − g(φ)) h(s)`
/// from `φ(0) = 1`. The step is shrunk so that `ℓ` falls on a node, and
/// `s_max` is rounded up to a whole number of steps.
pub fn shoot_profile(
    c: f64,
    growth: &GrowthLaw,
    front: &FrontKernelProfile,
    s_max: f64,
    ode_step: f64,
) -> Result<WaveProfile, WaveError> {
    check_growth(growth)?;
    let ell = front.ell;
    if !(c.is_finite() && c > 0.0) {
        return Err(WaveError::InvalidSpeed(c));
    }
    let max = ell / 200.0;
    if !(ode_step > 0.0 && ode_step <= max * (1.0 + 1e-12)) {
        return Err(WaveError::StepTooLarge { step: ode_step, max });
    }
    if !(s_max >= ell) {
        return Err(WaveError::ShortDomain { s_max, ell });
    }
    let n_ell = (ell / ode_step - 1e-9).ceil() as usize;
    let h = ell / n_ell as f64;
    let n = (s_max / h - 1e-9).ceil() as usize;
    let g1 = growth.g_one;
    let f = |s: f64, phi: f64| -> f64 {
        let g = growth.g(phi);
        -(g + (g1 - g) * front.eval(s)) / c
    };
    let mut values = Vec::with_capacity(n + 1);
    let mut phi = 1.0;
    values.push(phi);
    for k in 0..n {
        let s = k as f64 * h;
        let k1 = f(s, phi);
        let k2 = f(s + 0.5 * h, phi + 0.5 * h * k1);
        let k3 = f(s + 0.5 * h, phi + 0.5 * h * k2);
        let k4 = f(s + h, phi + h * k3);
        phi += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        values.push(phi);
    }
    let phi_at_ell = values[n_ell];
    let sign_at_ell = if phi_at_ell > 0.0 {
        1
    } else if phi_at_ell < 0.0 {
        -1
    } else {
        0
    };
    Ok(WaveProfile { c, ell, step: h, values, phi_at_ell, sign_at_ell, minimal: false })
}

pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_STEPS_PER_ELL: f64 = 2000.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimalSpeedResult {
    pub c_star: f64,
    pub bracket: (f64, f64),
    pub tol: f64,
    /// `(g(1) ∫_0^ℓ h, ℓ sup g)`.
    pub analytic_bounds: (f64, f64),
    /// `φ(ℓ)` at the analytic bounds.
    pub phi_at_bounds: (f64, f64),
    /// `φ(ℓ)` at the final bracket ends.
    pub phi_at_bracket: (f64, f64),
    pub ode_step: f64,
    pub iterations: u32,
    /// `φ_{c_hi} > 0` on every sample of `(0, ℓ]`.
    pub positive_on_support: bool,
    /// Smallest sample of `φ_{c*}` on `(0, ℓ)`.
    pub min_interior_phi: f64,
}

pub fn find_c_star(
    growth: &GrowthLaw,
    front: &FrontKernelProfile,
    tol: f64,
) -> Result<MinimalSpeedResult, WaveError> {
    find_c_star_with_step(growth, front, tol, front.ell / DEFAULT_STEPS_PER_ELL)
}

pub fn find_c_star_with_step(
    growth: &GrowthLaw,
    front: &FrontKernelProfile,
    tol: f64,
    ode_step: f64,
) -> Result<MinimalSpeedResult, WaveError> {
    check_growth(growth)?;
    if !growth.monotone_cap {
        return Err(WaveError::NotMonotoneCap);
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(WaveError::InvalidTolerance(tol));
    }
    let ell = front.ell;
    let bounds = (growth.g_one * front.integral_0_ell(), ell * growth.sup);
    let phi = |c: f64| shoot_profile(c, growth, front, ell, ode_step).map(|p| p.phi_at_ell);
    let (mut lo, mut hi) = bounds;
    let (mut phi_lo, mut phi_hi) = (phi(lo)?, phi(hi)?);
    let phi_at_bounds = (phi_lo, phi_hi);
    if !(phi_lo < 0.0 && phi_hi > 0.0) {
        return Err(WaveError::Bracket { c_lo: lo, c_hi: hi, phi_lo, phi_hi });
    }
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = phi(mid)?;
        if v < 0.0 {
            lo = mid;
            phi_lo = v;
        } else {
            hi = mid;
            phi_hi = v;
        }
        iterations += 1;
    }
    let c_star = 0.5 * (lo + hi);
    let upper = shoot_profile(hi, growth, front, ell, ode_step)?;
    let n_ell = upper.ell_index();
    let positive_on_support = upper.values[1..=n_ell].iter().all(|&v| v > 0.0);
    let star = shoot_profile(c_star, growth, front, ell, ode_step)?;
    let min_interior_phi = star.values[1..n_ell].iter().copied().fold(f64::INFINITY, f64::min);
    Ok(MinimalSpeedResult {
        c_star,
        bracket: (lo, hi),
        tol,
        analytic_bounds: bounds,
        phi_at_bounds,
        phi_at_bracket: (phi_lo, phi_hi),
        ode_step: upper.step,
        iterations,
        positive_on_support,
        min_interior_phi,
    })
}

impl MinimalSpeedResult {
    /// Profile at `c*` on `[0, s_max]`, flagged as minimal.
    pub fn profile(&self, growth: &GrowthLaw, front: &FrontKernelProfile, s_max: f64) -> Result<WaveProfile, WaveError> {
        let mut p = shoot_profile(self.c_star, growth, front, s_max.max(front.ell), self.ode_step)?;
        p.minimal = true;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotoneCheck {
    pub holds: bool,
    pub min_gap: f64,
    /// Right end of the compared interval: `ℓ`, or the first zero of `φ_{c0}`.
    pub s0: f64,
}

/// Compares `φ_{c1}` with `φ_{c0}` on `(0, s₀]`, where `s₀ ≤ ℓ` is the extent
/// of the region where `φ_{c0} ≥ 0`.
pub fn monotone_in_c_check(
    c0: f64,
    c1: f64,
    growth: &GrowthLaw,
    front: &FrontKernelProfile,
) -> Result<MonotoneCheck, WaveError> {
    if !(c0 > 0.0 && c1 >= c0) {
        return Err(WaveError::SpeedOrder { c0, c1 });
    }
    let step = front.ell / DEFAULT_STEPS_PER_ELL;
    let p0 = shoot_profile(c0, growth, front, front.ell, step)?;
    let p1 = shoot_profile(c1, growth, front, front.ell, step)?;
    let n_ell = p0.ell_index();
    let k0 = (1..=n_ell).find(|&k| p0.values[k] < 0.0).map_or(n_ell, |k| k - 1);
    let min_gap = (1..=k0).map(|k| p1.values[k] - p0.values[k]).fold(f64::INFINITY, f64::min);
    let min_gap = if k0 == 0 { 0.0 } else { min_gap };
    Ok(MonotoneCheck { holds: k0 > 0 && min_gap > 0.0, min_gap, s0: k0 as f64 * p0.step })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum WaveGeometry {
    /// `s = x·e − offset`.
    Planar { direction: [f64; 2] },
    /// `s = |x| − offset`.
    Radial,
}

/// Evaluates a wave profile as a field `x ↦ φ(s(x))`, clamped to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveSampler {
    pub profile: WaveProfile,
    pub geometry: WaveGeometry,
    pub offset: f64,
}

impl WaveSampler {
    pub fn coordinate(&self, x: [f64; 2]) -> f64 {
        match self.geometry {
            WaveGeometry::Planar { direction } => x[0] * direction[0] + x[1] * direction[1] - self.offset,
            WaveGeometry::Radial => x[0].hypot(x[1]) - self.offset,
        }
    }

    pub fn value_at_coordinate(&self, s: f64) -> f64 {
        if self.profile.minimal && s >= self.profile.ell {
            return 0.0;
        }
        self.profile.eval(s).clamp(0.0, 1.0)
    }

    pub fn value(&self, x: [f64; 2]) -> f64 {
        self.value_at_coordinate(self.coordinate(x))
    }

    pub fn with_offset(&self, offset: f64) -> Self {
        Self { offset, ..self.clone() }
    }
}

/// Planar sampler `x ↦ φ(x·e − offset)`; `direction` is normalised.
pub fn export_wave(profile: &WaveProfile, direction: [f64; 2], offset: f64) -> Result<WaveSampler, WaveError> {
    let n = direction[0].hypot(direction[1]);
    if !(n.is_finite() && (n - 1.0).abs() < 1e-9) {
        return Err(WaveError::InvalidSpeed(n));
    }
    Ok(WaveSampler { profile: profile.clone(), geometry: WaveGeometry::Planar { direction }, offset })
}

pub fn export_radial_wave(profile: &WaveProfile, offset: f64) -> WaveSampler {
    WaveSampler { profile: profile.clone(), geometry: WaveGeometry::Radial, offset }
}
