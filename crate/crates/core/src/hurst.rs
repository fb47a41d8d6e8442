//! Parametric Hurst functions on [0, 1].

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Family of a Hurst function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum HurstFamily {
    /// H(t) = h (the linear fractional stable motion case).
    Constant { h: f64 },
    /// H(t) = clamp(intercept + slope * t, lo, hi).
    AffineClipped { intercept: f64, slope: f64, lo: f64, hi: f64 },
    /// H(t) = mean + amplitude * sin(2π frequency t + phase).
    Sinusoidal {
        mean: f64,
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Linear interpolation through (knots_t[i], knots_h[i]); knots_t spans [0, 1].
    PiecewiseLinear { knots_t: Vec<f64>, knots_h: Vec<f64> },
}

/// A Hurst function together with its Hölder order, Hölder constant and range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurstSpec {
    #[serde(flatten)]
    pub family: HurstFamily,
    pub rho_h: f64,
    pub holder_const: f64,
    pub h_min: f64,
    pub h_max: f64,
}

impl HurstSpec {
    pub fn new(family: HurstFamily) -> Result<Self> {
        let (h_min, h_max, lip) = match &family {
            HurstFamily::Constant { h } => (*h, *h, 0.0),
            HurstFamily::AffineClipped { intercept, slope, lo, hi } => {
                if !(lo <= hi) {
                    return Err(Error::domain("lo", "clip range must satisfy lo <= hi"));
                }
                let a = intercept.clamp(*lo, *hi);
                let b = (intercept + slope).clamp(*lo, *hi);
                (a.min(b), a.max(b), slope.abs())
            }
            HurstFamily::Sinusoidal { mean, amplitude, frequency, phase } => {
                let f = |t: f64| mean + amplitude * (2.0 * PI * frequency * t + phase).sin();
                let (lo, hi) = sinusoid_extrema(*mean, *amplitude, *frequency, *phase, 0.0, 1.0, &f);
                (lo, hi, 2.0 * PI * frequency.abs() * amplitude.abs())
            }
            HurstFamily::PiecewiseLinear { knots_t, knots_h } => {
                if knots_t.len() < 2 || knots_t.len() != knots_h.len() {
                    return Err(Error::domain("knots_t", "need >= 2 knots with matching ordinates"));
                }
                if knots_t[0] != 0.0 || *knots_t.last().unwrap() != 1.0 || knots_t.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::domain("knots_t", "must increase strictly from 0 to 1"));
                }
                let lo = knots_h.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = knots_h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lip = knots_t
                    .windows(2)
                    .zip(knots_h.windows(2))
                    .map(|(t, h)| ((h[1] - h[0]) / (t[1] - t[0])).abs())
                    .fold(0.0, f64::max);
                (lo, hi, lip)
            }
        };
        if !(h_min > 0.5 && h_max < 1.0) || !h_min.is_finite() || !h_max.is_finite() {
            return Err(Error::domain("hurst", format!("range [{h_min}, {h_max}] must lie in (1/2, 1)")));
        }
        Ok(Self {
            family,
            rho_h: 1.0,
            holder_const: lip,
            h_min,
            h_max,
        })
    }

    pub fn constant(h: f64) -> Result<Self> {
        Self::new(HurstFamily::Constant { h })
    }

    /// Unclipped on [0, 1]: the bounds are the line's own range there.
    pub fn affine(intercept: f64, slope: f64) -> Result<Self> {
        let end = intercept + slope;
        Self::new(HurstFamily::AffineClipped {
            intercept,
            slope,
            lo: intercept.min(end),
            hi: intercept.max(end),
        })
    }

    pub fn sinusoidal(mean: f64, amplitude: f64, frequency: f64) -> Result<Self> {
        Self::new(HurstFamily::Sinusoidal { mean, amplitude, frequency, phase: 0.0 })
    }

    pub fn piecewise_linear(knots_t: Vec<f64>, knots_h: Vec<f64>) -> Result<Self> {
        Self::new(HurstFamily::PiecewiseLinear { knots_t, knots_h })
    }

    /// Range check against the model interval (1/α, 1) and the order condition ρ_H > H̄.
    pub fn validate_for(&self, alpha: f64) -> Result<()> {
        if !(self.h_min > 1.0 / alpha && self.h_max < 1.0) {
            return Err(Error::domain(
                "hurst",
                format!("range [{}, {}] must lie in (1/alpha, 1) = ({}, 1)", self.h_min, self.h_max, 1.0 / alpha),
            ));
        }
        if !(self.rho_h > self.h_max && self.rho_h <= 1.0) {
            return Err(Error::domain("rho_h", format!("need h_max < rho_h <= 1, got {}", self.rho_h)));
        }
        Ok(())
    }

    pub fn is_constant(&self) -> bool {
        self.h_min == self.h_max
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.family {
            HurstFamily::Constant { h } => *h,
            HurstFamily::AffineClipped { intercept, slope, lo, hi } => (intercept + slope * t).clamp(*lo, *hi),
            HurstFamily::Sinusoidal { mean, amplitude, frequency, phase } => {
                mean + amplitude * (2.0 * PI * frequency * t + phase).sin()
            }
            HurstFamily::PiecewiseLinear { knots_t, knots_h } => {
                let t = t.clamp(0.0, 1.0);
                let i = knots_t.partition_point(|&k| k <= t).clamp(1, knots_t.len() - 1);
                let (t0, t1) = (knots_t[i - 1], knots_t[i]);
                let w = (t - t0) / (t1 - t0);
                (1.0 - w) * knots_h[i - 1] + w * knots_h[i]
            }
        }
    }

    /// Exact minimum over [lo, hi] for the built-in families.
    pub fn analytic_min(&self, lo: f64, hi: f64) -> f64 {
        match &self.family {
            HurstFamily::Constant { h } => *h,
            HurstFamily::AffineClipped { .. } => self.eval(lo).min(self.eval(hi)),
            HurstFamily::Sinusoidal { mean, amplitude, frequency, phase } => {
                sinusoid_extrema(*mean, *amplitude, *frequency, *phase, lo, hi, &|t| self.eval(t)).0
            }
            HurstFamily::PiecewiseLinear { knots_t, .. } => knots_t
                .iter()
                .copied()
                .filter(|&k| k > lo && k < hi)
                .chain([lo, hi])
                .map(|t| self.eval(t))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Short human-readable identifier used in provenance records.
    pub fn id(&self) -> String {
        match &self.family {
            HurstFamily::Constant { h } => format!("constant(h={h})"),
            HurstFamily::AffineClipped { intercept, slope, lo, hi } => {
                format!("affine-clipped(intercept={intercept},slope={slope},lo={lo},hi={hi})")
            }
            HurstFamily::Sinusoidal { mean, amplitude, frequency, phase } => {
                format!("sinusoidal(mean={mean},amplitude={amplitude},frequency={frequency},phase={phase})")
            }
            HurstFamily::PiecewiseLinear { knots_t, knots_h } => {
                format!("piecewise-linear(t={knots_t:?},h={knots_h:?})")
            }
        }
    }
}

// Minimum and maximum of mean + amp*sin(2π f t + phase) on [lo, hi]:
// endpoints plus interior critical points.
fn sinusoid_extrema(
    _mean: f64,
    amplitude: f64,
    frequency: f64,
    phase: f64,
    lo: f64,
    hi: f64,
    f: &dyn Fn(f64) -> f64,
) -> (f64, f64) {
    let mut candidates = vec![lo, hi];
    if frequency != 0.0 && amplitude != 0.0 {
        let w = 2.0 * PI * frequency;
        // critical points: w t + phase = π/2 + nπ
        let n_lo = ((w * lo + phase - PI / 2.0) / PI).floor() as i64 - 1;
        let n_hi = ((w * hi + phase - PI / 2.0) / PI).ceil() as i64 + 1;
        let (n_lo, n_hi) = (n_lo.min(n_hi), n_lo.max(n_hi));
        for n in n_lo..=n_hi {
            let t = (PI / 2.0 + n as f64 * PI - phase) / w;
            if t > lo && t < hi {
                candidates.push(t);
            }
        }
    }
    let vals: Vec<f64> = candidates.iter().map(|&t| f(t)).collect();
    (
        vals.iter().copied().fold(f64::INFINITY, f64::min),
        vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    )
}
