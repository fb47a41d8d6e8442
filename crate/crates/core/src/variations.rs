//! Filtered discrete variations and their empirical β-means.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hurst::HurstSpec;
use crate::kernel::KernelNorms;
use crate::stable::moment_constant;

/// Compact interval `[lo, hi] ⊆ [0, 1]` with non-empty interior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalSpec {
    pub lo: f64,
    pub hi: f64,
}

impl IntervalSpec {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(0.0 <= lo && lo < hi && hi <= 1.0) {
            return Err(Error::domain("interval", format!("need 0 <= lo < hi <= 1, got [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn unit() -> Self {
        Self { lo: 0.0, hi: 1.0 }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }
}

/// `a_l = (-1)^{L-l} C(L, l)`, `l = 0..=L`.
pub fn filter_coeffs(order: usize) -> Result<Vec<i64>> {
    if order < 2 {
        return Err(Error::domain("filter_order", format!("must be >= 2, got {order}")));
    }
    if order > 60 {
        return Err(Error::domain("filter_order", format!("must be <= 60, got {order}")));
    }
    let mut binom = 1i64;
    let mut out = Vec::with_capacity(order + 1);
    for l in 0..=order {
        let sign = if (order - l) % 2 == 0 { 1 } else { -1 };
        out.push(sign * binom);
        binom = binom * (order - l) as i64 / (l + 1) as i64;
    }
    Ok(out)
}

/// `ν_N(I) = {k ∈ [0, N-L] : k/N ∈ I}`.
///
/// Boundary membership is decided on `N·lo` and `N·hi` with a few-ulp
/// allowance, so decimal endpoints such as `0.3` keep `k = 3, N = 10`.
pub fn indices_nu(interval: &IntervalSpec, n: usize, order: usize) -> Result<Vec<usize>> {
    let len = interval.length();
    if (n as f64) * len < (order + 1) as f64 {
        return Err(Error::Precondition(format!(
            "N = {n} is below (L+1)/λ(I) = {:.3}",
            (order + 1) as f64 / len
        )));
    }
    let nf = n as f64;
    let slack = 4.0 * f64::EPSILON * nf;
    let k_lo = (nf * interval.lo - slack).ceil().max(0.0) as usize;
    let k_hi = ((nf * interval.hi + slack).floor() as usize).min(n - order);
    Ok(if k_lo <= k_hi { (k_lo..=k_hi).collect() } else { Vec::new() })
}

/// `d_{N,k} = Σ_l a_l Y((k+l)/N)` for `k = 0..=N-L`, given `values[k] = Y(k/N)`.
pub fn variations_d(values: &[f64], order: usize) -> Result<Vec<f64>> {
    let coeffs: Vec<f64> = filter_coeffs(order)?.into_iter().map(|a| a as f64).collect();
    if values.len() < order + 1 {
        return Err(Error::domain(
            "path",
            format!("needs at least L+1 = {} samples, got {}", order + 1, values.len()),
        ));
    }
    Ok(values
        .windows(order + 1)
        .map(|w| w.iter().zip(&coeffs).map(|(y, a)| a * y).sum())
        .collect())
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta <= 0.25 {
        Ok(())
    } else {
        Err(Error::domain("beta", format!("must lie in (0, 1/4], got {beta}")))
    }
}

/// Sum with a fixed pairwise association, independent of how callers chunk work.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// `V_N^β(I) = |ν|^{-1} Σ_{k∈ν} |d_k|^β`.
pub fn empirical_mean_v(d: &[f64], indices: &[usize], beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if indices.is_empty() {
        return Err(Error::domain("indices", "index set is empty"));
    }
    if let Some(&k) = indices.iter().find(|&&k| k >= d.len()) {
        return Err(Error::domain("indices", format!("index {k} outside {} variations", d.len())));
    }
    let terms: Vec<f64> = indices.iter().map(|&k| d[k].abs().powf(beta)).collect();
    Ok(pairwise_sum(&terms) / indices.len() as f64)
}

/// Exact expectation of the frozen mean Ṽ_N^β(I):
/// `c(β) |ν|^{-1} Σ_{k∈ν} ‖Φ_α(·, H(k/N))‖^β N^{-β H(k/N)}`.
pub fn expected_v_tilde(
    h: &HurstSpec,
    interval: &IntervalSpec,
    n: usize,
    beta: f64,
    norms: &dyn KernelNorms,
) -> Result<f64> {
    check_beta(beta)?;
    let alpha = norms.alpha();
    if beta >= alpha {
        return Err(Error::InfiniteMoment { p: beta, alpha });
    }
    let order = norms.filter_order();
    let nu = indices_nu(interval, n, order)?;
    if nu.is_empty() {
        return Err(Error::domain("indices", "index set is empty"));
    }
    let nf = n as f64;
    let hs: Vec<f64> = nu.iter().map(|&k| h.eval(k as f64 / nf)).collect();
    let phi = norms.norms(&hs)?;
    let terms: Vec<f64> = hs
        .iter()
        .zip(&phi)
        .map(|(&hk, &g)| g.powf(beta) * nf.powf(-beta * hk))
        .collect();
    Ok(moment_constant(beta, alpha)? * pairwise_sum(&terms) / nu.len() as f64)
}

/// Variations on one interval at one resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationSet {
    pub n: usize,
    pub filter_order: usize,
    pub interval: IntervalSpec,
    pub indices: Vec<usize>,
    pub d_values: Vec<f64>,
    pub beta: f64,
    pub v_value: f64,
}

impl VariationSet {
    /// Build from samples `values[k] = Y(k/N)`, `k = 0..=N`.
    pub fn compute(values: &[f64], order: usize, interval: IntervalSpec, beta: f64) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::domain("path", "needs at least two samples"));
        }
        let n = values.len() - 1;
        let d = variations_d(values, order)?;
        let indices = indices_nu(&interval, n, order)?;
        let v_value = empirical_mean_v(&d, &indices, beta)?;
        let d_values = indices.iter().map(|&k| d[k]).collect();
        Ok(Self {
            n,
            filter_order: order,
            interval,
            indices,
            d_values,
            beta,
            v_value,
        })
    }
}
