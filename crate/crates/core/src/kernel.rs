//! Radial dispersal kernels, their grid discretisation, the planar front
//! profile `h(s) = K * 1_{x·e ≤ 0}` and the ball-versus-half-space comparison
//! used by the radial subsolution argument.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::quad::adaptive_simpson;
use crate::stencil::ConvolutionStencil;

#[derive(Debug, Error, PartialEq)]
pub enum KernelError {
    #[error("kernel radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("kernel dimension must be 1 or 2, got {0}")]
    InvalidDimension(usize),
    #[error("grid spacing must be positive and finite, got {0}")]
    InvalidSpacing(f64),
    #[error("grid spacing {spacing} does not resolve kernel radius {radius} (need spacing <= radius/4)")]
    TooCoarse { spacing: f64, radius: f64 },
    #[error("kernel profile has negative value {value} at radius {radius}")]
    NegativeProfile { radius: f64, value: f64 },
    #[error("kernel profile is not a function of distance alone: {0}")]
    NonRadial(String),
    #[error("kernel has zero mass on this grid")]
    ZeroMass,
    #[error("stencil weights differ at offsets related by symmetry of {0:?}")]
    AsymmetricStencil([i32; 2]),
    #[error("front profile sample spacing {spacing} too coarse (need <= radius/50 = {max})")]
    SampleSpacing { spacing: f64, max: f64 },
    #[error("quadrature did not converge: achieved error {achieved:e}, tolerance {tolerance:e}")]
    QuadratureNonConvergence { achieved: f64, tolerance: f64 },
    #[error("field has {got} values but the grid has {expected} nodes")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("stencil does not match grid: {0}")]
    GridMismatch(String),
    #[error("{0}")]
    InvalidArgument(String),
}

/// Tabulated radial profile `ρ ↦ k(ρ)` on `[0, ℓ]`, linearly interpolated and
/// zero beyond `ℓ`. Need not be normalised.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialProfile {
    radii: Vec<f64>,
    values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(points: &[(f64, f64)]) -> Result<Self, KernelError> {
        if points.len() < 2 {
            return Err(KernelError::NonRadial("profile needs at least two (radius, value) points".into()));
        }
        for &(r, v) in points {
            if !r.is_finite() || r < 0.0 {
                return Err(KernelError::NonRadial(format!("radius {r} is not a distance")));
            }
            if !v.is_finite() || v < 0.0 {
                return Err(KernelError::NegativeProfile { radius: r, value: v });
            }
        }
        if points[0].0 != 0.0 {
            return Err(KernelError::NonRadial("profile must start at radius 0".into()));
        }
        for w in points.windows(2) {
            if w[1].0 == w[0].0 && w[1].1 != w[0].1 {
                return Err(KernelError::NonRadial(format!(
                    "radius {} is given two different values",
                    w[0].0
                )));
            }
            if w[1].0 <= w[0].0 {
                return Err(KernelError::NonRadial("radii must be strictly increasing".into()));
            }
        }
        Ok(Self {
            radii: points.iter().map(|p| p.0).collect(),
            values: points.iter().map(|p| p.1).collect(),
        })
    }

    pub fn max_radius(&self) -> f64 {
        *self.radii.last().unwrap()
    }

    pub fn eval(&self, rho: f64) -> f64 {
        let n = self.radii.len();
        if rho > self.radii[n - 1] {
            return 0.0;
        }
        let k = self.radii.partition_point(|&r| r <= rho).clamp(1, n - 1);
        let (r0, r1) = (self.radii[k - 1], self.radii[k]);
        let t = ((rho - r0) / (r1 - r0)).clamp(0.0, 1.0);
        self.values[k - 1] + t * (self.values[k] - self.values[k - 1])
    }

    /// Knots, used to split integrals at kinks.
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    /// `K = 1_{B_ℓ} / |B_ℓ|`.
    IndicatorBall,
    CustomRadial(RadialProfile),
}

/// How stencil weights are obtained from the kernel density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StencilQuadrature {
    /// Density evaluated at the node offset.
    #[default]
    Midpoint,
    /// Density averaged over the cell around each offset (midpoint rule on a
    /// 16-per-axis sub-lattice). With this rule a half-space mask on a
    /// half-cell-offset grid is integrated exactly by indicator kernels.
    CellAverage,
}

const SUBCELLS: i64 = 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Kernel {
    pub kind: KernelKind,
    pub radius: f64,
    pub dim: usize,
    /// Factor applied to the raw profile so that the discrete mass is 1.
    pub normalization: f64,
    /// Continuum integral of the raw profile over `R^dim`.
    pub continuum_mass: f64,
    pub quadrature: StencilQuadrature,
}

impl Kernel {
    /// Un-normalised profile `k(ρ)`, zero outside the support.
    pub fn raw(&self, rho: f64) -> f64 {
        if rho > self.radius {
            return 0.0;
        }
        match &self.kind {
            KernelKind::IndicatorBall => 1.0,
            KernelKind::CustomRadial(p) => p.eval(rho),
        }
    }

    /// Continuum density `K(ρ)` with unit mass.
    pub fn density(&self, rho: f64) -> f64 {
        self.raw(rho) / self.continuum_mass
    }

    /// Radii where the profile has kinks.
    fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            KernelKind::IndicatorBall => vec![0.0, self.radius],
            KernelKind::CustomRadial(p) => {
                let mut b: Vec<f64> = p.radii().iter().copied().filter(|&r| r < self.radius).collect();
                b.push(self.radius);
                b
            }
        }
    }

    /// `∫ K(|x − y|) 1_{|y| < ball}(y) dy` at a point at distance `distance`
    /// from the ball centre (two dimensions, polar quadrature around the point).
    pub fn ball_convolution(&self, ball: f64, distance: f64) -> Result<f64, KernelError> {
        if self.dim != 2 {
            return Err(KernelError::InvalidArgument("ball convolution is implemented for d = 2".into()));
        }
        let d = distance.max(0.0);
        // Angular measure of the circle of radius ρ around the point that lies inside the ball.
        let arc = move |rho: f64| -> f64 {
            if rho == 0.0 {
                return if d < ball { 2.0 * PI } else { 0.0 };
            }
            if d == 0.0 {
                return if rho < ball { 2.0 * PI } else { 0.0 };
            }
            let q = (ball * ball - d * d - rho * rho) / (2.0 * d * rho);
            if q <= -1.0 {
                0.0
            } else if q >= 1.0 {
                2.0 * PI
            } else {
                2.0 * (-q).acos()
            }
        };
        let integrand = |rho: f64| self.density(rho) * rho * arc(rho);
        let mut cuts = self.breakpoints();
        cuts.extend([(d - ball).abs(), d + ball]);
        self.integrate_pieces(&integrand, cuts, 1e-13)
    }

    fn integrate_pieces(&self, f: &dyn Fn(f64) -> f64, mut cuts: Vec<f64>, tol: f64) -> Result<f64, KernelError> {
        cuts.retain(|&c| (0.0..=self.radius).contains(&c));
        cuts.push(0.0);
        cuts.push(self.radius);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut total = 0.0;
        let mut err = 0.0;
        let mut ok = true;
        for w in cuts.windows(2) {
            let q = adaptive_simpson(&f, w[0], w[1], tol, 48);
            total += q.value;
            err += q.error;
            ok &= q.converged;
        }
        if !ok && err > 1e-8 {
            return Err(KernelError::QuadratureNonConvergence { achieved: err, tolerance: 1e-8 });
        }
        Ok(total)
    }
}

fn ball_volume(dim: usize, radius: f64) -> f64 {
    if dim == 1 {
        2.0 * radius
    } else {
        PI * radius * radius
    }
}

/// Builds a kernel with the default midpoint stencil.
pub fn build_kernel(
    kind: KernelKind,
    ell: f64,
    dim: usize,
    grid_spacing: f64,
) -> Result<(Kernel, ConvolutionStencil), KernelError> {
    build_kernel_with(kind, ell, dim, grid_spacing, StencilQuadrature::Midpoint)
}

pub fn build_kernel_with(
    kind: KernelKind,
    ell: f64,
    dim: usize,
    grid_spacing: f64,
    quadrature: StencilQuadrature,
) -> Result<(Kernel, ConvolutionStencil), KernelError> {
    if !(ell.is_finite() && ell > 0.0) {
        return Err(KernelError::InvalidRadius(ell));
    }
    if dim != 1 && dim != 2 {
        return Err(KernelError::InvalidDimension(dim));
    }
    if !(grid_spacing.is_finite() && grid_spacing > 0.0) {
        return Err(KernelError::InvalidSpacing(grid_spacing));
    }
    if grid_spacing > ell / 4.0 * (1.0 + 1e-12) {
        return Err(KernelError::TooCoarse { spacing: grid_spacing, radius: ell });
    }
    if let KernelKind::CustomRadial(p) = &kind {
        if (p.max_radius() - ell).abs() > 1e-12 * ell {
            return Err(KernelError::NonRadial(format!(
                "profile is tabulated up to {} but the kernel radius is {ell}",
                p.max_radius()
            )));
        }
    }

    let mut kernel = Kernel {
        kind,
        radius: ell,
        dim,
        normalization: 1.0,
        continuum_mass: 1.0,
        quadrature,
    };
    kernel.continuum_mass = match kernel.kind {
        KernelKind::IndicatorBall => ball_volume(dim, ell),
        KernelKind::CustomRadial(_) => {
            let k = kernel.clone();
            let shell = move |rho: f64| {
                if dim == 1 {
                    2.0 * k.raw(rho)
                } else {
                    2.0 * PI * rho * k.raw(rho)
                }
            };
            kernel.integrate_pieces(&shell, kernel.breakpoints(), 1e-14)?
        }
    };
    if !(kernel.continuum_mass > 0.0) {
        return Err(KernelError::ZeroMass);
    }

    let ratio = ell / grid_spacing;
    let cell = grid_spacing.powi(dim as i32);
    let inside_tol = 1.0 + 2e-9;
    let (stencil, raw_mass) = match quadrature {
        StencilQuadrature::Midpoint => {
            let reach = (ratio * (1.0 + 1e-9)).floor() as usize;
            let limit = ratio * ratio * inside_tol;
            let k = &kernel;
            ConvolutionStencil::from_weight_fn(dim, grid_spacing, ell, reach, |i, j| {
                let n2 = (i as f64).powi(2) + (j as f64).powi(2);
                if n2 > limit {
                    return 0.0;
                }
                let rho = (n2.sqrt() * grid_spacing).min(ell);
                k.raw(rho) * cell
            })?
        }
        StencilQuadrature::CellAverage => {
            let reach = (ratio + 0.5 * (dim as f64).sqrt()).ceil() as usize;
            // Sub-lattice coordinates are odd integers in units of Δx / (2S).
            let scale = grid_spacing / (2 * SUBCELLS) as f64;
            let limit = (2.0 * SUBCELLS as f64 * ratio).powi(2) * inside_tol;
            let k = &kernel;
            ConvolutionStencil::from_weight_fn(dim, grid_spacing, ell, reach, |i, j| {
                // Canonical representative makes symmetric weights bitwise equal.
                let (a, b) = {
                    let (x, y) = (i.unsigned_abs() as i64, j.unsigned_abs() as i64);
                    (x.max(y), x.min(y))
                };
                let (a, b) = if dim == 1 { (i.unsigned_abs() as i64, 0) } else { (a, b) };
                let subs_b: Vec<i64> = if dim == 1 {
                    vec![0]
                } else {
                    (0..SUBCELLS).map(|q| 2 * SUBCELLS * b - SUBCELLS + 2 * q + 1).collect()
                };
                let mut acc = 0.0;
                for q1 in 0..SUBCELLS {
                    let n1 = 2 * SUBCELLS * a - SUBCELLS + 2 * q1 + 1;
                    for &n2 in &subs_b {
                        let sq = (n1 * n1 + n2 * n2) as f64;
                        if sq > limit {
                            continue;
                        }
                        let rho = (sq.sqrt() * scale).min(ell);
                        acc += k.raw(rho);
                    }
                }
                acc / (SUBCELLS.pow(dim as u32)) as f64 * cell
            })?
        }
    };
    kernel.normalization = 1.0 / raw_mass;
    stencil.check_radial_symmetry()?;
    Ok((kernel, stencil))
}

/// Samples of `h(s) = K * 1_{x·e ≤ 0}` at signed distance `s` from a planar
/// front, on a uniform grid of `[−ℓ, ℓ]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontKernelProfile {
    pub ell: f64,
    pub spacing: f64,
    /// `values[k] = h(−ℓ + k·spacing)`.
    pub values: Vec<f64>,
    /// Accumulated quadrature error estimate (zero for closed forms).
    pub quadrature_error: f64,
}

impl FrontKernelProfile {
    pub fn eval(&self, s: f64) -> f64 {
        if s <= -self.ell {
            return 1.0;
        }
        if s >= self.ell {
            return 0.0;
        }
        let t = (s + self.ell) / self.spacing;
        let k = (t.floor() as usize).min(self.values.len() - 2);
        let w = t - k as f64;
        self.values[k] + w * (self.values[k + 1] - self.values[k])
    }

    pub fn s_at(&self, k: usize) -> f64 {
        -self.ell + k as f64 * self.spacing
    }

    /// `(s, h(s))` pairs.
    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().enumerate().map(|(k, &h)| (self.s_at(k), h))
    }

    /// Trapezoid rule for `∫_0^ℓ h` over the samples.
    pub fn integral_0_ell(&self) -> f64 {
        let mid = (self.values.len() - 1) / 2;
        let tail = &self.values[mid..];
        let inner: f64 = tail[1..tail.len() - 1].iter().sum();
        self.spacing * (0.5 * (tail[0] + tail[tail.len() - 1]) + inner)
    }
}

const FRONT_TOLERANCE: f64 = 1e-8;

pub fn front_profile(kernel: &Kernel, sample_spacing: f64) -> Result<FrontKernelProfile, KernelError> {
    let ell = kernel.radius;
    let max = ell / 50.0;
    if !(sample_spacing > 0.0 && sample_spacing <= max * (1.0 + 1e-12)) {
        return Err(KernelError::SampleSpacing { spacing: sample_spacing, max });
    }
    let half = (ell / sample_spacing - 1e-9).ceil() as usize;
    let ds = ell / half as f64;
    let mut values = vec![0.0; 2 * half + 1];
    let mut error = 0.0;

    if kernel.dim == 1 && kernel.kind == KernelKind::IndicatorBall {
        for (k, v) in values.iter_mut().enumerate() {
            let s = -ell + k as f64 * ds;
            *v = ((ell - s) / (2.0 * ell)).clamp(0.0, 1.0);
        }
    } else {
        let marginal = |z: f64| -> Result<f64, KernelError> { marginal(kernel, z) };
        // Check the marginal once so that inner failures surface as errors.
        marginal(0.0)?;
        let cuts = kernel.breakpoints();
        values[2 * half] = 0.0;
        let mut acc = 0.0;
        for k in (half..2 * half).rev() {
            let a = k as f64 * ds - ell;
            let b = a + ds;
            let mut pts = vec![a];
            pts.extend(cuts.iter().copied().filter(|&c| c > a && c < b));
            pts.push(b);
            for w in pts.windows(2) {
                let f = |z: f64| marginal(z).unwrap_or(f64::NAN);
                let q = adaptive_simpson(&f, w[0], w[1], 1e-14, 50);
                if !q.value.is_finite() {
                    return Err(KernelError::QuadratureNonConvergence { achieved: f64::INFINITY, tolerance: FRONT_TOLERANCE });
                }
                acc += q.value;
                error += q.error;
            }
            values[k] = acc.clamp(0.0, 1.0);
        }
        if error > FRONT_TOLERANCE {
            return Err(KernelError::QuadratureNonConvergence { achieved: error, tolerance: FRONT_TOLERANCE });
        }
        for k in 0..half {
            values[k] = 1.0 - values[2 * half - k];
        }
    }
    Ok(FrontKernelProfile { ell, spacing: ds, values, quadrature_error: error })
}

/// `∫ K(z, y′) dy′`, the density of the first coordinate under `K`.
fn marginal(kernel: &Kernel, z: f64) -> Result<f64, KernelError> {
    let z = z.abs();
    let ell = kernel.radius;
    if z >= ell {
        return Ok(0.0);
    }
    if kernel.dim == 1 {
        return Ok(kernel.density(z));
    }
    let chord = (ell * ell - z * z).sqrt();
    if kernel.kind == KernelKind::IndicatorBall {
        return Ok(2.0 * chord / kernel.continuum_mass);
    }
    let mut pts = vec![0.0];
    pts.extend(
        kernel
            .breakpoints()
            .into_iter()
            .filter(|&r| r > z && r < ell)
            .map(|r| (r * r - z * z).sqrt()),
    );
    pts.push(chord);
    let f = |y: f64| kernel.density(z.hypot(y));
    let mut total = 0.0;
    let mut err = 0.0;
    for w in pts.windows(2) {
        let q = adaptive_simpson(&f, w[0], w[1], 1e-14, 40);
        total += q.value;
        if !q.converged {
            err += q.error;
        }
    }
    if err > FRONT_TOLERANCE {
        return Err(KernelError::QuadratureNonConvergence { achieved: err, tolerance: FRONT_TOLERANCE });
    }
    Ok(2.0 * total)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapRow {
    pub radius: f64,
    /// `max_s [(1−δ) h(s) − K * 1_{B_R}(R + s)]` over the samples of `[0, ℓ)`.
    pub max_violation: f64,
    pub worst_s: f64,
    /// `min_s K * 1_{B_R}(R + s) / h(s)` over the same samples.
    pub min_ratio: f64,
    pub holds: bool,
    /// Both sides at `s = ℓ`.
    pub lhs_at_ell: f64,
    pub rhs_at_ell: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapReport {
    pub delta: f64,
    pub rows: Vec<CapRow>,
    pub least_radius_without_violation: Option<f64>,
    pub violation_non_increasing: bool,
}

/// Compares `(1−δ) h(|x| − R)` with `K * 1_{B_R}(x)` along a ray for
/// `|x| ∈ [R, R + ℓ]`.
pub fn check_cap_inequality(
    kernel: &Kernel,
    front: &FrontKernelProfile,
    delta: f64,
    radii: &[f64],
) -> Result<CapReport, KernelError> {
    if kernel.dim != 2 {
        return Err(KernelError::InvalidArgument("the cap inequality check needs d = 2".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(KernelError::InvalidArgument(format!("delta must lie in (0, 1), got {delta}")));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) || radii.iter().any(|&r| !(r > 0.0)) {
        return Err(KernelError::InvalidArgument("radii must be positive and increasing".into()));
    }
    let ell = kernel.radius;
    let mid = (front.values.len() - 1) / 2;
    let mut rows = Vec::with_capacity(radii.len());
    for &radius in radii {
        let mut max_violation = f64::NEG_INFINITY;
        let mut worst_s = 0.0;
        let mut min_ratio = f64::INFINITY;
        for k in mid..front.values.len() - 1 {
            let s = front.s_at(k);
            let h = front.values[k];
            let rhs = kernel.ball_convolution(radius, radius + s)?;
            let v = (1.0 - delta) * h - rhs;
            if v > max_violation {
                max_violation = v;
                worst_s = s;
            }
            if h > 0.0 {
                min_ratio = min_ratio.min(rhs / h);
            }
        }
        rows.push(CapRow {
            radius,
            max_violation,
            worst_s,
            min_ratio,
            holds: max_violation <= 0.0,
            lhs_at_ell: (1.0 - delta) * front.eval(ell),
            rhs_at_ell: kernel.ball_convolution(radius, radius + ell)?,
        });
    }
    let least_radius_without_violation = rows.iter().find(|r| r.holds).map(|r| r.radius);
    let violation_non_increasing = rows.windows(2).all(|w| w[1].max_violation <= w[0].max_violation + 1e-12);
    Ok(CapReport { delta, rows, least_radius_without_violation, violation_non_increasing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn one_dimensional_indicator_weights_are_uniform() {
        let (_, st) = build_kernel(KernelKind::IndicatorBall, 1.0, 1, 0.05).unwrap();
        assert_eq!(st.offsets.len(), 41);
        let w0 = st.weights[0];
        assert!(st.weights.iter().all(|&w| w == w0));
        assert!((st.weight_sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_dimensional_center_weight() {
        let dx = 0.05;
        let (k, st) = build_kernel(KernelKind::IndicatorBall, 1.0, 2, dx).unwrap();
        // Riemann count of lattice points in the unit disk.
        let n = (-20i32..=20)
            .flat_map(|i| (-20i32..=20).map(move |j| (i, j)))
            .filter(|&(i, j)| i * i + j * j <= 400)
            .count();
        let w = st.weight_at([0, 0]);
        assert!((w - 1.0 / n as f64).abs() < 1e-15);
        let exact = dx * dx / PI;
        assert!((w / exact - 1.0).abs() < 2.0 * dx);
        assert!((w - k.normalization * dx * dx).abs() < 1e-15);
        assert!((st.weight_sum() - 1.0).abs() < 1e-12);
        assert!(st.offsets.iter().all(|o| ((o[0] as f64).hypot(o[1] as f64)) * dx <= 1.0 + dx));
    }

    #[test]
    fn negative_profile_is_rejected() {
        assert!(matches!(
            RadialProfile::new(&[(0.0, 1.0), (0.5, -0.1), (1.0, 0.0)]),
            Err(KernelError::NegativeProfile { .. })
        ));
    }

    #[test]
    fn contradictory_profile_is_non_radial() {
        assert!(matches!(
            RadialProfile::new(&[(0.0, 1.0), (0.5, 1.0), (0.5, 0.2), (1.0, 0.0)]),
            Err(KernelError::NonRadial(_))
        ));
    }

    #[test]
    fn coarse_grid_is_rejected() {
        assert!(matches!(
            build_kernel(KernelKind::IndicatorBall, 1.0, 1, 0.3),
            Err(KernelError::TooCoarse { .. })
        ));
    }

    #[test]
    fn cell_average_integrates_half_line_exactly() {
        let dx = 1.0 / 41.0;
        let (_, st) = build_kernel_with(KernelKind::IndicatorBall, 1.0, 1, dx, StencilQuadrature::CellAverage).unwrap();
        // Offsets 21..=41 from x = ℓ/2 reach cells left of zero, the last one halfway.
        let left: f64 = (21..=41).map(|d| st.weight_at([d, 0])).sum();
        assert!((left - 0.25).abs() < 1e-14);
    }

    #[test]
    fn custom_cone_is_symmetric_and_normalized() {
        let p = RadialProfile::new(&[(0.0, 1.0), (1.0, 0.0)]).unwrap();
        let (k, st) = build_kernel(KernelKind::CustomRadial(p), 1.0, 2, 0.1).unwrap();
        assert!((k.continuum_mass - PI / 3.0).abs() < 1e-10);
        assert!((st.weight_sum() - 1.0).abs() < 1e-12);
        st.check_radial_symmetry().unwrap();
    }

    #[test]
    fn front_profile_one_dimensional_closed_form() {
        let (k, _) = build_kernel(KernelKind::IndicatorBall, 1.0, 1, 0.05).unwrap();
        let h = front_profile(&k, 0.01).unwrap();
        assert_eq!(h.eval(0.0), 0.5);
        assert_eq!(h.eval(1.0), 0.0);
        assert!((h.eval(0.5) - 0.25).abs() < 1e-15);
        assert!((h.integral_0_ell() - 0.25).abs() < 1e-14);
    }

    #[test]
    fn front_profile_quadrature_agrees_with_closed_form() {
        // A flat custom profile in 1D goes through the quadrature path.
        let p = RadialProfile::new(&[(0.0, 2.0), (1.0, 2.0)]).unwrap();
        let (k, _) = build_kernel(KernelKind::CustomRadial(p), 1.0, 1, 0.05).unwrap();
        let h = front_profile(&k, 0.02).unwrap();
        for (s, v) in h.samples() {
            assert!((v - ((1.0 - s) / 2.0).clamp(0.0, 1.0)).abs() < 1e-9, "s = {s}");
        }
    }

    #[test]
    fn front_profile_two_dimensional_segment() {
        let (k, _) = build_kernel(KernelKind::IndicatorBall, 1.0, 2, 0.05).unwrap();
        let h = front_profile(&k, 0.01).unwrap();
        let exact = ((0.5f64).acos() - 0.5 * 0.75f64.sqrt()) / PI;
        assert!((h.eval(0.5) - exact).abs() < 1e-9);
        assert!((h.eval(0.0) - 0.5).abs() < 1e-9);
        assert_eq!(h.eval(1.0), 0.0);
    }

    #[test]
    fn sample_spacing_is_checked() {
        let (k, _) = build_kernel(KernelKind::IndicatorBall, 1.0, 1, 0.05).unwrap();
        assert!(matches!(front_profile(&k, 0.05), Err(KernelError::SampleSpacing { .. })));
    }

    #[test]
    fn ball_convolution_limits() {
        let (k, _) = build_kernel(KernelKind::IndicatorBall, 1.0, 2, 0.1).unwrap();
        assert!((k.ball_convolution(3.0, 0.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(k.ball_convolution(3.0, 4.0).unwrap().abs() < 1e-12);
        // Ball of radius ℓ at its own centre contains the whole support.
        assert!((k.ball_convolution(1.0, 0.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cap_inequality_small_list() {
        let (k, _) = build_kernel(KernelKind::IndicatorBall, 1.0, 2, 0.1).unwrap();
        let h = front_profile(&k, 0.02).unwrap();
        let rep = check_cap_inequality(&k, &h, 0.5, &[2.0, 10.0, 100.0]).unwrap();
        assert!(rep.violation_non_increasing);
        assert!(rep.rows.last().unwrap().holds);
        for r in &rep.rows {
            assert_eq!(r.lhs_at_ell, 0.0);
            assert!(r.rhs_at_ell.abs() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn h_is_monotone(peak in 0.1f64..3.0, mid in 0.0f64..3.0, ell in 0.5f64..2.0, dim in 1usize..=2) {
            let p = RadialProfile::new(&[(0.0, peak), (0.5 * ell, mid), (ell, 0.0)]).unwrap();
            let (k, st) = build_kernel(KernelKind::CustomRadial(p), ell, dim, ell / 8.0).unwrap();
            prop_assert!((st.weight_sum() - 1.0).abs() < 1e-12);
            let h = front_profile(&k, ell / 50.0).unwrap();
            prop_assert!(h.values.windows(2).all(|w| w[1] <= w[0]));
            prop_assert!(h.values.iter().all(|v| (0.0..=1.0).contains(v)));
            prop_assert!((h.eval(0.0) - 0.5).abs() < 1e-8);
        }
    }
}
