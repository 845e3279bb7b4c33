//! Growth laws `g` with their certified constants, and the optional gain law
//! of the generalised saturated model.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of sample intervals on `[0, 1]` used to verify the constants.
pub const VERIFY_SAMPLES: usize = 10_000;

#[derive(Debug, Error, PartialEq)]
pub enum GrowthError {
    #[error("growth parameter `{name}` is invalid: {reason}")]
    Parameter { name: &'static str, reason: String },
    #[error("growth law has g(0) = {0}, expected 0")]
    NonzeroAtZero(f64),
    #[error("growth law is negative at u = {u}: g = {value}")]
    Negative { u: f64, value: f64 },
    #[error("growth law violates g(u) >= r u at u = {u} (r = {r})")]
    LowerBound { u: f64, r: f64 },
    #[error("growth law exceeds its Lipschitz bound {bound} near u = {u}")]
    Lipschitz { u: f64, bound: f64 },
    #[error("gain law must satisfy h(0) > 0, got {0}")]
    GainAtZero(f64),
    #[error("tabulated law is malformed: {0}")]
    Table(String),
}

/// Piecewise linear function on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tabulated {
    pub u: Vec<f64>,
    pub g: Vec<f64>,
}

impl Tabulated {
    pub fn new(u: Vec<f64>, g: Vec<f64>) -> Result<Self, GrowthError> {
        if u.len() != g.len() || u.len() < 2 {
            return Err(GrowthError::Table("need at least two (u, g) pairs of equal length".into()));
        }
        if u[0] != 0.0 || *u.last().unwrap() != 1.0 {
            return Err(GrowthError::Table("knots must start at u = 0 and end at u = 1".into()));
        }
        if u.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(GrowthError::Table("knots must be strictly increasing".into()));
        }
        if let Some((k, &v)) = g.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(GrowthError::Negative { u: u[k], value: v });
        }
        Ok(Self { u, g })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.u.len();
        let k = self.u.partition_point(|&a| a <= x).clamp(1, n - 1);
        let t = ((x - self.u[k - 1]) / (self.u[k] - self.u[k - 1])).clamp(0.0, 1.0);
        self.g[k - 1] + t * (self.g[k] - self.g[k - 1])
    }

    fn max_slope(&self) -> f64 {
        self.u
            .windows(2)
            .zip(self.g.windows(2))
            .map(|(a, b)| ((b[1] - b[0]) / (a[1] - a[0])).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateFn {
    /// `r₀ u`
    Linear { rate: f64 },
    /// `r₀ u (1 − u/M)`
    Logistic { rate: f64, capacity: f64 },
    /// Constant value; only meaningful as a gain law.
    Constant { value: f64 },
    Tabulated(Tabulated),
}

impl RateFn {
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            RateFn::Linear { rate } => rate * u,
            RateFn::Logistic { rate, capacity } => rate * u * (1.0 - u / capacity),
            RateFn::Constant { value } => *value,
            RateFn::Tabulated(t) => t.eval(u),
        }
    }

    fn check_params(&self) -> Result<(), GrowthError> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(GrowthError::Parameter { name, reason: format!("must be positive and finite, got {v}") })
            }
        };
        match self {
            RateFn::Linear { rate } => positive("rate", *rate),
            RateFn::Logistic { rate, capacity } => {
                positive("rate", *rate)?;
                if !(capacity.is_finite() && *capacity > 1.0) {
                    return Err(GrowthError::Parameter {
                        name: "capacity",
                        reason: format!("must exceed 1 so that g(1) > 0, got {capacity}"),
                    });
                }
                Ok(())
            }
            RateFn::Constant { value } => {
                if value.is_finite() && *value >= 0.0 {
                    Ok(())
                } else {
                    Err(GrowthError::Parameter { name: "value", reason: format!("must be nonnegative, got {value}") })
                }
            }
            RateFn::Tabulated(t) => Tabulated::new(t.u.clone(), t.g.clone()).map(|_| ()),
        }
    }

    /// Lipschitz constant on `[0, 1]`.
    fn lipschitz(&self) -> f64 {
        match self {
            RateFn::Linear { rate } => *rate,
            RateFn::Logistic { rate, capacity } => rate * (1.0f64).max((1.0 - 2.0 / capacity).abs()),
            RateFn::Constant { .. } => 0.0,
            RateFn::Tabulated(t) => t.max_slope(),
        }
    }

    /// `sup_{[0,1]}` of the function.
    fn sup(&self) -> f64 {
        match self {
            RateFn::Linear { rate } => *rate,
            RateFn::Logistic { rate, capacity } => {
                if *capacity <= 2.0 {
                    rate * capacity / 4.0
                } else {
                    self.eval(1.0)
                }
            }
            RateFn::Constant { value } => *value,
            RateFn::Tabulated(t) => t.g.iter().copied().fold(0.0, f64::max),
        }
    }

    /// Largest `r` with `g(u) ≥ r u` on `(0, 1]`.
    fn linear_lower_bound(&self) -> f64 {
        match self {
            RateFn::Linear { rate } => *rate,
            RateFn::Logistic { rate, capacity } => rate * (1.0 - 1.0 / capacity),
            RateFn::Constant { .. } => f64::INFINITY,
            // g(u)/u is monotone between knots, so the minimum sits at a knot.
            RateFn::Tabulated(t) => t.u[1..].iter().zip(&t.g[1..]).map(|(u, g)| g / u).fold(f64::INFINITY, f64::min),
        }
    }
}

/// A growth law `g` on `[0, 1]` with its certified constants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthLaw {
    pub rate: RateFn,
    pub gain: Option<RateFn>,
    /// `g(u) ≥ r u` on `(0, 1]`.
    pub r: f64,
    /// Lipschitz bound of `g` on `[0, 1]`.
    pub lipschitz: f64,
    pub sup: f64,
    pub sup_gain: f64,
    pub g_one: f64,
    /// `g(u) ≤ g(1)` on `[0, 1]`.
    pub monotone_cap: bool,
}

impl GrowthLaw {
    pub fn new(rate: RateFn, gain: Option<RateFn>) -> Result<Self, GrowthError> {
        rate.check_params()?;
        if matches!(rate, RateFn::Constant { .. }) {
            return Err(GrowthError::NonzeroAtZero(rate.eval(0.0)));
        }
        let r = rate.linear_lower_bound();
        if !(r > 0.0) {
            return Err(GrowthError::Parameter {
                name: "rate",
                reason: format!("no positive r with g(u) >= r u (best r = {r})"),
            });
        }
        let lipschitz = rate.lipschitz();
        let sup = rate.sup();
        let g_one = rate.eval(1.0);
        verify_sample(&rate, r, lipschitz)?;
        let mut sample_max: f64 = 0.0;
        for k in 0..=VERIFY_SAMPLES {
            sample_max = sample_max.max(rate.eval(k as f64 / VERIFY_SAMPLES as f64));
        }
        let monotone_cap = sample_max <= g_one + 1e-12 && sup <= g_one + 1e-12;

        let sup_gain = match &gain {
            None => 0.0,
            Some(h) => {
                h.check_params()?;
                let h0 = h.eval(0.0);
                if !(h0 > 0.0) {
                    return Err(GrowthError::GainAtZero(h0));
                }
                let mut m: f64 = 0.0;
                for k in 0..=VERIFY_SAMPLES {
                    let v = h.eval(k as f64 / VERIFY_SAMPLES as f64);
                    if v < 0.0 {
                        return Err(GrowthError::Negative { u: k as f64 / VERIFY_SAMPLES as f64, value: v });
                    }
                    m = m.max(v);
                }
                m.max(h.sup())
            }
        };
        Ok(Self { rate, gain, r, lipschitz, sup, sup_gain, g_one, monotone_cap })
    }

    pub fn linear(rate: f64) -> Result<Self, GrowthError> {
        Self::new(RateFn::Linear { rate }, None)
    }

    pub fn logistic(rate: f64, capacity: f64) -> Result<Self, GrowthError> {
        Self::new(RateFn::Logistic { rate, capacity }, None)
    }

    /// `g(u)` with the extension `g = 0` below 0 and `g = g(1)` above 1.
    #[inline]
    pub fn g(&self, u: f64) -> f64 {
        if u <= 0.0 {
            0.0
        } else if u >= 1.0 {
            self.g_one
        } else {
            self.rate.eval(u)
        }
    }

    /// Coefficient of `K * 1_{u=1}` in the saturated model: the explicit gain
    /// law when present, `g(1) − g(u)` otherwise.
    #[inline]
    pub fn gain_coefficient(&self, u: f64) -> f64 {
        match &self.gain {
            Some(h) => h.eval(u.clamp(0.0, 1.0)),
            None => self.g_one - self.g(u),
        }
    }

    /// Bracket of the saturated model at density `u` given the convolved
    /// mask value `km`.
    #[inline]
    pub fn singular_bracket(&self, u: f64, km: f64) -> f64 {
        match &self.gain {
            Some(h) => self.g(u) + h.eval(u.clamp(0.0, 1.0)) * km,
            None => self.g(u) * (1.0 - km) + self.g_one * km,
        }
    }

    /// `sup` of the coefficient of `K * 1_{u=1}`; `g(1)` for the standard
    /// saturated model since `g(0) = 0`.
    pub fn effective_sup_gain(&self) -> f64 {
        match self.gain {
            Some(_) => self.sup_gain,
            None => self.g_one,
        }
    }

    /// `max(L, sup g + sup h_gain)`, the rate bound behind the saturated-model
    /// step-size cap.
    pub fn singular_rhs_bound(&self) -> f64 {
        self.lipschitz.max(self.sup + self.effective_sup_gain())
    }
}

fn verify_sample(rate: &RateFn, r: f64, lipschitz: f64) -> Result<(), GrowthError> {
    let g0 = rate.eval(0.0);
    if g0 != 0.0 {
        return Err(GrowthError::NonzeroAtZero(g0));
    }
    let n = VERIFY_SAMPLES;
    let mut prev = g0;
    for k in 1..=n {
        let u = k as f64 / n as f64;
        let v = rate.eval(u);
        if !(v >= 0.0) {
            return Err(GrowthError::Negative { u, value: v });
        }
        if v < r * u - 1e-12 * (1.0 + r) {
            return Err(GrowthError::LowerBound { u, r });
        }
        if (v - prev).abs() > lipschitz * (1.0 / n as f64) * (1.0 + 1e-9) + 1e-15 {
            return Err(GrowthError::Lipschitz { u, bound: lipschitz });
        }
        prev = v;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_constants() {
        let g = GrowthLaw::logistic(1.0, 1.2).unwrap();
        assert!((g.g_one - 1.0 / 6.0).abs() < 1e-15);
        assert!((g.g(0.6) - 0.3).abs() < 1e-15);
        assert!((g.sup - 0.3).abs() < 1e-15);
        assert!(!g.monotone_cap);
        assert!((g.r - 1.0 / 6.0).abs() < 1e-15);
        let g = GrowthLaw::logistic(2.0, 3.0).unwrap();
        assert!(g.monotone_cap);
        assert_eq!(g.lipschitz, 2.0);
        // M = 2 is the borderline case where g(1) is the maximum.
        assert!(GrowthLaw::logistic(1.0, 2.0).unwrap().monotone_cap);
    }

    #[test]
    fn invalid_laws_are_rejected() {
        assert!(GrowthLaw::linear(0.0).is_err());
        assert!(GrowthLaw::logistic(1.0, 1.0).is_err());
        assert!(matches!(
            GrowthLaw::new(RateFn::Constant { value: 1.0 }, None),
            Err(GrowthError::NonzeroAtZero(_))
        ));
        assert!(matches!(
            GrowthLaw::new(RateFn::Linear { rate: 1.0 }, Some(RateFn::Linear { rate: 1.0 })),
            Err(GrowthError::GainAtZero(_))
        ));
        let t = Tabulated { u: vec![0.0, 0.5, 1.0], g: vec![0.1, 0.5, 1.0] };
        assert!(GrowthLaw::new(RateFn::Tabulated(t), None).is_err());
    }

    #[test]
    fn tabulated_constants() {
        let t = Tabulated::new(vec![0.0, 0.5, 1.0], vec![0.0, 0.75, 1.0]).unwrap();
        let g = GrowthLaw::new(RateFn::Tabulated(t), None).unwrap();
        assert_eq!(g.r, 1.0);
        assert_eq!(g.lipschitz, 1.5);
        assert!(g.monotone_cap);
        assert!((g.g(0.25) - 0.375).abs() < 1e-15);
    }

    #[test]
    fn brackets() {
        let g = GrowthLaw::linear(1.0).unwrap();
        assert_eq!(g.singular_bracket(0.0, 1.0), 1.0);
        assert_eq!(g.singular_bracket(0.3, 0.0), 0.3);
        assert_eq!(g.g(-0.5), 0.0);
        assert_eq!(g.g(1.5), 1.0);
        let gen = GrowthLaw::new(RateFn::Linear { rate: 1.0 }, Some(RateFn::Constant { value: 0.5 })).unwrap();
        assert_eq!(gen.singular_bracket(0.2, 0.5), 0.2 + 0.25);
        assert_eq!(gen.singular_rhs_bound(), 1.5);
    }
}
