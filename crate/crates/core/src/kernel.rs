//! Moving-average kernel of the stable field and its filtered version Φ_α.
//!
//! For `v ∈ (1/α, 1)` and `κ = v - 1/α`,
//!
//! ```text
//! Φ_α(u, v) = Σ_{l=0}^{L} a_l (l - u)_+^κ
//! ```
//!
//! vanishes for `u ≥ L` and decays like `|u|^{κ-L}` as `u → -∞`. Summing the
//! signed binomials directly loses every significant digit in that tail, so
//! for `u < -1` the value is computed from the Peano form of the L-th forward
//! difference, `Δ^L f(x) = ∫_0^L M_L(t) f^{(L)}(x+t) dt`, with `M_L` the
//! cardinal B-spline of order L and `f(x) = x^κ`.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, integrate};
use crate::stable::check_alpha;
use crate::variations::filter_coeffs;

/// Below this abscissa Φ_α is evaluated through the B-spline representation.
const TAIL_SWITCH: f64 = -1.0;
const TAIL_GL_NODES: usize = 16;
const MAX_PANELS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub alpha: f64,
    /// Filter order L (number of vanishing moments).
    pub filter_order: usize,
    /// Absolute tolerance on the L^α norm.
    pub quad_abs_tol: f64,
    /// Largest admissible left truncation point |u| for the norm integral.
    pub quad_tail_cut: f64,
}

impl KernelConfig {
    pub fn new(alpha: f64, filter_order: usize) -> Result<Self> {
        let cfg = Self {
            alpha,
            filter_order,
            quad_abs_tol: 1e-10,
            quad_tail_cut: 1e12,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_tolerance(mut self, abs_tol: f64) -> Result<Self> {
        self.quad_abs_tol = abs_tol;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if self.filter_order < 2 {
            return Err(Error::domain("filter_order", format!("must be >= 2, got {}", self.filter_order)));
        }
        if !(self.quad_abs_tol > 0.0) || !(self.quad_tail_cut > 0.0) {
            return Err(Error::domain("quad_abs_tol", "tolerances must be positive"));
        }
        Ok(())
    }
}

/// `x^κ` for `x > 0`, zero otherwise.
#[inline]
pub fn positive_part_pow(x: f64, kappa: f64) -> f64 {
    if x > 0.0 {
        x.powf(kappa)
    } else {
        0.0
    }
}

pub(crate) fn check_hurst_arg(v: f64, alpha: f64) -> Result<()> {
    if v > 1.0 / alpha && v < 1.0 {
        Ok(())
    } else {
        Err(Error::domain("v", format!("must lie in (1/alpha, 1) = ({}, 1), got {v}", 1.0 / alpha)))
    }
}

/// Moving-average kernel `(t - s)_+^{v-1/α} - (-s)_+^{v-1/α}`.
pub fn ma_kernel(t: f64, s: f64, v: f64, alpha: f64) -> Result<f64> {
    check_hurst_arg(v, alpha)?;
    let kappa = v - 1.0 / alpha;
    Ok(positive_part_pow(t - s, kappa) - positive_part_pow(-s, kappa))
}

/// Evaluator of Φ_α for a fixed filter order, holding the filter and the
/// B-spline quadrature used in the far tail.
#[derive(Debug, Clone)]
pub struct PhiKernel {
    alpha: f64,
    coeffs: Vec<f64>,
    // (t_i, w_i * M_L(t_i)) over [0, L]
    tail_rule: Vec<(f64, f64)>,
}

impl PhiKernel {
    pub fn new(alpha: f64, filter_order: usize) -> Result<Self> {
        check_alpha(alpha)?;
        let coeffs = filter_coeffs(filter_order)?.into_iter().map(|a| a as f64).collect();
        let (x, w) = gauss_legendre(TAIL_GL_NODES);
        let mut tail_rule = Vec::with_capacity(filter_order * TAIL_GL_NODES);
        for cell in 0..filter_order {
            for (xi, wi) in x.iter().zip(&w) {
                let t = cell as f64 + 0.5 * (xi + 1.0);
                tail_rule.push((t, 0.5 * wi * cardinal_bspline(filter_order, t)));
            }
        }
        Ok(Self { alpha, coeffs, tail_rule })
    }

    pub fn from_config(cfg: &KernelConfig) -> Result<Self> {
        cfg.validate()?;
        Self::new(cfg.alpha, cfg.filter_order)
    }

    pub fn filter_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Φ_α(u, v); exactly zero for `u ≥ L`.
    pub fn eval(&self, u: f64, v: f64) -> Result<f64> {
        check_hurst_arg(v, self.alpha)?;
        Ok(self.eval_kappa(u, v - 1.0 / self.alpha))
    }

    /// Direct signed-binomial sum, accurate for `u ≥ -1`.
    pub fn eval_direct(&self, u: f64, kappa: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(l, a)| a * positive_part_pow(l as f64 - u, kappa))
            .sum()
    }

    /// B-spline (Peano kernel) form, valid for `u < 0`, accurate for `u ≤ -1`.
    pub fn eval_tail(&self, u: f64, kappa: f64) -> f64 {
        let x = -u;
        let lf = self.filter_order() as f64;
        let falling = derivative_factor(kappa, self.filter_order());
        let sum: f64 = self
            .tail_rule
            .iter()
            .map(|&(t, w)| w * (x + t).powf(kappa - lf))
            .sum();
        falling * sum
    }

    #[inline]
    pub(crate) fn eval_kappa(&self, u: f64, kappa: f64) -> f64 {
        let lf = self.filter_order() as f64;
        if u >= lf {
            0.0
        } else if u < TAIL_SWITCH {
            self.eval_tail(u, kappa)
        } else {
            self.eval_direct(u, kappa)
        }
    }

    /// Upper bound `|κ(κ-1)…(κ-L+1)| · |u|^{κ-L}` on |Φ_α(u, v)| for `u < 0`.
    pub fn tail_envelope(&self, u: f64, kappa: f64) -> f64 {
        let lf = self.filter_order() as f64;
        derivative_factor(kappa, self.filter_order()).abs() * (-u).powf(kappa - lf)
    }

    /// ‖Φ_α(·, v)‖_{L^α(ℝ)} by adaptive quadrature.
    pub fn norm(&self, v: f64, abs_tol: f64, tail_cut: f64) -> Result<f64> {
        check_hurst_arg(v, self.alpha)?;
        let alpha = self.alpha;
        let kappa = v - 1.0 / alpha;
        let l = self.filter_order();
        let lf = l as f64;

        // Left truncation from the analytic envelope:
        // ∫_U^∞ |c_L|^α x^{α(κ-L)} dx = |c_L|^α U^{1+α(κ-L)} / (α(L-κ) - 1).
        let c_l = derivative_factor(kappa, l).abs();
        let decay = alpha * (lf - kappa) - 1.0;
        let target = abs_tol.powf(alpha);
        let cut = ((target * decay) / c_l.powf(alpha)).powf(-1.0 / decay).max(2.0);
        if cut > tail_cut {
            return Err(Error::Quadrature {
                estimate: f64::NAN,
                error: f64::INFINITY,
                tolerance: abs_tol,
            });
        }

        let mut breaks: Vec<f64> = vec![TAIL_SWITCH];
        breaks.extend((0..=l).map(|i| i as f64));
        let core = integrate(
            |u| self.eval_direct(u, kappa).abs().powf(alpha),
            &breaks,
            0.25 * abs_tol,
            0.0,
            MAX_PANELS,
        )?;

        // u = -e^s on [-cut, -1]
        let s_hi = cut.ln();
        let pieces = (s_hi.ceil() as usize).max(1);
        let s_breaks: Vec<f64> = (0..=pieces).map(|i| s_hi * i as f64 / pieces as f64).collect();
        let tail = integrate(
            |s| {
                let x = s.exp();
                self.eval_tail(-x, kappa).abs().powf(alpha) * x
            },
            &s_breaks,
            0.25 * abs_tol,
            0.0,
            MAX_PANELS,
        )?;

        let total = core.value + tail.value;
        if !(total > 0.0) {
            return Err(Error::Quadrature {
                estimate: total,
                error: core.error + tail.error,
                tolerance: abs_tol,
            });
        }
        Ok(total.powf(1.0 / alpha))
    }
}

/// κ(κ-1)…(κ-L+1), the L-th derivative factor of x^κ.
fn derivative_factor(kappa: f64, order: usize) -> f64 {
    (0..order).map(|i| kappa - i as f64).product()
}

/// Cardinal B-spline of order `k` with knots 0, 1, …, k (unit integral).
pub fn cardinal_bspline(k: usize, t: f64) -> f64 {
    if !(0.0..k as f64).contains(&t) {
        return 0.0;
    }
    let mut vals: Vec<f64> = (0..k)
        .map(|i| if t >= i as f64 && t < (i + 1) as f64 { 1.0 } else { 0.0 })
        .collect();
    for order in 2..=k {
        let of = order as f64;
        for i in 0..=(k - order) {
            let s = t - i as f64;
            vals[i] = (s * vals[i] + (of - s) * vals[i + 1]) / (of - 1.0);
        }
    }
    vals[0]
}

/// Φ_α(u, v) with the filter order taken from `cfg`.
pub fn phi_alpha(u: f64, v: f64, cfg: &KernelConfig) -> Result<f64> {
    PhiKernel::from_config(cfg)?.eval(u, v)
}

/// ‖Φ_α(·, v)‖_{L^α} within `cfg.quad_abs_tol`.
pub fn phi_alpha_norm(v: f64, cfg: &KernelConfig) -> Result<f64> {
    PhiKernel::from_config(cfg)?.norm(v, cfg.quad_abs_tol, cfg.quad_tail_cut)
}

/// Sampled supremum of `(1 + L + |u|)^{L + 1/α - v} |Φ_α(u, v)|` over
/// `u ∈ [-u_max, L]` and `v` in `v_grid`.
pub fn check_localization(cfg: &KernelConfig, v_grid: &[f64], u_max: f64) -> Result<f64> {
    let kernel = PhiKernel::from_config(cfg)?;
    let l = cfg.filter_order as f64;
    let mut us: Vec<f64> = Vec::new();
    // fine uniform grid on [-2L, L] (integers land exactly), log grid beyond
    let near = (3 * cfg.filter_order * 1000) as i64;
    us.extend((0..=near).map(|i| -2.0 * l + i as f64 / 1000.0));
    if u_max > 2.0 * l {
        let (lo, hi) = ((2.0 * l).ln(), u_max.ln());
        us.extend((0..=4000).map(|i| -(lo + (hi - lo) * i as f64 / 4000.0).exp()));
    }
    let mut sup: f64 = 0.0;
    for &v in v_grid {
        check_hurst_arg(v, cfg.alpha)?;
        let kappa = v - 1.0 / cfg.alpha;
        let expo = l + 1.0 / cfg.alpha - v;
        for &u in us.iter().filter(|u| u.abs() <= u_max || **u >= 0.0) {
            let val = (1.0 + l + u.abs()).powf(expo) * kernel.eval_kappa(u, kappa).abs();
            sup = sup.max(val);
        }
    }
    Ok(sup)
}

/// Source of kernel norms `v ↦ ‖Φ_α(·, v)‖_{L^α}`.
pub trait KernelNorms: Sync {
    fn alpha(&self) -> f64;
    fn filter_order(&self) -> usize;
    fn norm(&self, v: f64) -> Result<f64>;

    /// Evaluate many norms; implementations may parallelize.
    fn norms(&self, vs: &[f64]) -> Result<Vec<f64>> {
        vs.iter().map(|&v| self.norm(v)).collect()
    }
}

/// Exact (quadrature) kernel norms, memoized by the bit pattern of `v`.
#[derive(Debug)]
pub struct PhiNormCache {
    kernel: PhiKernel,
    cfg: KernelConfig,
    memo: Mutex<HashMap<u64, f64>>,
}

impl PhiNormCache {
    pub fn new(cfg: KernelConfig) -> Result<Self> {
        Ok(Self {
            kernel: PhiKernel::from_config(&cfg)?,
            cfg,
            memo: Mutex::new(HashMap::new()),
        })
    }

    pub fn config(&self) -> &KernelConfig {
        &self.cfg
    }

    pub fn kernel(&self) -> &PhiKernel {
        &self.kernel
    }

    fn compute(&self, v: f64) -> Result<f64> {
        self.kernel.norm(v, self.cfg.quad_abs_tol, self.cfg.quad_tail_cut)
    }
}

impl KernelNorms for PhiNormCache {
    fn alpha(&self) -> f64 {
        self.cfg.alpha
    }

    fn filter_order(&self) -> usize {
        self.cfg.filter_order
    }

    fn norm(&self, v: f64) -> Result<f64> {
        if let Some(&n) = self.memo.lock().unwrap().get(&v.to_bits()) {
            return Ok(n);
        }
        let n = self.compute(v)?;
        self.memo.lock().unwrap().insert(v.to_bits(), n);
        Ok(n)
    }

    fn norms(&self, vs: &[f64]) -> Result<Vec<f64>> {
        let missing: Vec<f64> = {
            let memo = self.memo.lock().unwrap();
            let mut m: Vec<f64> = vs.iter().copied().filter(|v| !memo.contains_key(&v.to_bits())).collect();
            m.sort_by(f64::total_cmp);
            m.dedup_by(|a, b| a.to_bits() == b.to_bits());
            m
        };
        let fresh: Vec<(u64, f64)> = missing
            .par_iter()
            .map(|&v| self.compute(v).map(|n| (v.to_bits(), n)))
            .collect::<Result<_>>()?;
        let mut memo = self.memo.lock().unwrap();
        memo.extend(fresh);
        Ok(vs.iter().map(|v| memo[&v.to_bits()]).collect())
    }
}
