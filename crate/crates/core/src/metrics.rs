//! Error norms, ground truth, rate fits, and the shapes of the theoretical bounds.
//!
//! Bound evaluators set every unknown multiplicative constant to one; they are
//! meant for slope and shape comparisons only.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{lambda_exponent, HEstimate};
use crate::hurst::HurstSpec;
use crate::rng::seeded;
use crate::variations::{check_beta, IntervalSpec};

const FULL_PAIRS_MAX: usize = 2000;
const RANDOM_PAIRS: usize = 1_000_000;
const PAIR_SEED: u64 = 0x5eed_0f_ba1e;

fn grid_points(grid: usize) -> Result<Vec<f64>> {
    if grid < 2 {
        return Err(Error::domain("grid", format!("must be >= 2, got {grid}")));
    }
    Ok((0..grid).map(|i| i as f64 / (grid - 1) as f64).collect())
}

/// `max_t |H̃(t) - H(t)|` on `grid` equispaced points of `[0, 1]`.
pub fn uniform_error(est: &HEstimate, h: &HurstSpec, grid: usize) -> Result<f64> {
    let ts = grid_points(grid)?;
    Ok(ts
        .iter()
        .map(|&t| (est.eval_unchecked(t) - h.eval(t)).abs())
        .fold(0.0, f64::max))
}

/// Hölder norm of order `b` of samples `f(ts[i])`:
/// `max |f| + max |f(t1) - f(t2)| / |t1 - t2|^b`.
///
/// All pairs are visited for up to 2000 points; beyond that, every adjacent
/// pair plus 10^6 pairs drawn with a fixed seed.
pub fn holder_norm(ts: &[f64], fs: &[f64], b: f64) -> Result<f64> {
    if !(b > 0.0 && b <= 1.0) {
        return Err(Error::domain("b", format!("must lie in (0, 1], got {b}")));
    }
    if ts.len() != fs.len() || ts.len() < 2 {
        return Err(Error::domain("grid", "need >= 2 abscissae matching the values"));
    }
    let sup = fs.iter().map(|f| f.abs()).fold(0.0, f64::max);
    let q = |i: usize, j: usize| {
        let dt = (ts[i] - ts[j]).abs();
        if dt == 0.0 {
            0.0
        } else {
            (fs[i] - fs[j]).abs() / dt.powf(b)
        }
    };
    let n = ts.len();
    let mut best: f64 = 0.0;
    if n <= FULL_PAIRS_MAX {
        for i in 0..n {
            for j in i + 1..n {
                best = best.max(q(i, j));
            }
        }
    } else {
        for i in 0..n - 1 {
            best = best.max(q(i, i + 1));
        }
        let mut rng = seeded(PAIR_SEED);
        for _ in 0..RANDOM_PAIRS {
            let i = rng.random_range(0..n);
            let j = rng.random_range(0..n);
            best = best.max(q(i, j));
        }
    }
    Ok(sup + best)
}

/// Hölder-norm error `‖H̃ - H‖_b` on `grid` equispaced points.
pub fn holder_error(est: &HEstimate, h: &HurstSpec, b: f64, grid: usize) -> Result<f64> {
    let ts = grid_points(grid)?;
    let fs: Vec<f64> = ts.iter().map(|&t| est.eval_unchecked(t) - h.eval(t)).collect();
    holder_norm(&ts, &fs, b)
}

/// `H̲(I) = min_{t∈I} H(t)`: analytic for the built-in families, otherwise
/// a grid search polished by golden-section search.
pub fn interval_min_h(h: &HurstSpec, interval: &IntervalSpec, resolution: usize) -> Result<f64> {
    if resolution < 2 {
        return Err(Error::domain("resolution", format!("must be >= 2, got {resolution}")));
    }
    Ok(h.analytic_min(interval.lo, interval.hi))
}

/// Grid minimum of `f` on `[lo, hi]` refined by golden-section search on the best cell.
pub fn grid_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64, resolution: usize) -> f64 {
    let step = (hi - lo) / (resolution - 1) as f64;
    let (mut best_i, mut best) = (0, f64::INFINITY);
    for i in 0..resolution {
        let v = f(lo + i as f64 * step);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let mut a = (lo + (best_i as f64 - 1.0) * step).max(lo);
    let mut b = (lo + (best_i as f64 + 1.0) * step).min(hi);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..200 {
        if (b - a).abs() < 1e-15 {
            break;
        }
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    best.min(f(0.5 * (a + b)))
}

/// Least-squares fit of `log error` against `log N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub ns: Vec<usize>,
    pub errors: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn fit_rate(ns: &[usize], errors: &[f64]) -> Result<RateFit> {
    if ns.len() < 3 || ns.len() != errors.len() {
        return Err(Error::domain("ns", "need >= 3 (N, error) pairs"));
    }
    if ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("ns", "must be strictly increasing"));
    }
    if let Some(e) = errors.iter().find(|e| !(**e > 0.0) || !e.is_finite()) {
        return Err(Error::domain("errors", format!("must be positive and finite, got {e}")));
    }
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let scale = ys.iter().map(|y| y * y).sum::<f64>().max(1.0);
    let r2 = if ss_res <= 1e-24 * scale {
        1.0
    } else if ss_tot == 0.0 {
        0.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(RateFit {
        ns: ns.to_vec(),
        errors: errors.to_vec(),
        slope,
        intercept,
        r2,
    })
}

fn check_rate_args(n: usize, beta: f64, rho_h: f64) -> Result<f64> {
    check_beta(beta)?;
    if n < 3 {
        return Err(Error::domain("N", format!("must be >= 3, got {n}")));
    }
    if !(rho_h > 0.0 && rho_h <= 1.0) {
        return Err(Error::domain("rho_h", format!("must lie in (0, 1], got {rho_h}")));
    }
    Ok(n as f64)
}

/// The three summands of the local `L^p` bound, with constants set to 1:
/// `min{((log log N)/log N)^p, λ^{pρ}}`, `N^{-pβ(ρ - h_sup)}`, and
/// `N^{-pΛ} (log N)^{8(1-Λ)} λ^{-4(1-Λ)} max{λ^2, N^{-(p+4)Λ}}`.
pub fn bound_terms_local(
    n: usize,
    interval: &IntervalSpec,
    p: f64,
    beta: f64,
    order: usize,
    rho_h: f64,
    h_sup: f64,
) -> Result<[f64; 3]> {
    let nf = check_rate_args(n, beta, rho_h)?;
    let lam = lambda_exponent(order, beta, p)?;
    let len = interval.length();
    let ln = nf.ln();
    let first = (ln.ln() / ln).powf(p).min(len.powf(p * rho_h));
    let second = nf.powf(-p * beta * (rho_h - h_sup));
    let third = nf.powf(-p * lam)
        * ln.powf(8.0 * (1.0 - lam))
        * len.powf(-4.0 * (1.0 - lam))
        * len.powi(2).max(nf.powf(-(p + 4.0) * lam));
    Ok([first, second, third])
}

/// Sum of [`bound_terms_local`].
pub fn bound_rhs_local(
    n: usize,
    interval: &IntervalSpec,
    p: f64,
    beta: f64,
    order: usize,
    rho_h: f64,
    h_sup: f64,
) -> Result<f64> {
    Ok(bound_terms_local(n, interval, p, beta, order, rho_h, h_sup)?.iter().sum())
}

/// `(β(L-1) - 2) / (4β(L-1) + 2)`, positive exactly when `L > 2/β + 1`.
pub fn global_exponent(beta: f64, order: usize) -> Result<f64> {
    check_beta(beta)?;
    let bl = beta * (order as f64 - 1.0);
    let e = (bl - 2.0) / (4.0 * bl + 2.0);
    if !(e > 0.0) {
        return Err(Error::Regime(format!(
            "L = {order} does not exceed 2/beta + 1 = {}",
            2.0 / beta + 1.0
        )));
    }
    Ok(e)
}

/// `θ^{-1} N^{-e} + N^{-β(ρ - h_sup)} + θ^ρ` with `e` from [`global_exponent`].
pub fn bound_rhs_global(n: usize, theta: f64, beta: f64, order: usize, rho_h: f64, h_sup: f64) -> Result<f64> {
    let nf = check_rate_args(n, beta, rho_h)?;
    let e = global_exponent(beta, order)?;
    if !(theta > 0.0 && theta <= 0.5) {
        return Err(Error::domain("theta", format!("must lie in (0, 1/2], got {theta}")));
    }
    Ok(nf.powf(-e) / theta + nf.powf(-beta * (rho_h - h_sup)) + theta.powf(rho_h))
}

/// `T_N(μ, β) = min{(log log N)/log N, μ^ρ} + N^{-βρ}(log N)^3 + μ^{-1} N^{-1} (log N)^2`.
pub fn eval_tn(n: usize, mu: f64, beta: f64, rho_h: f64) -> Result<f64> {
    let nf = check_rate_args(n, beta, rho_h)?;
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::domain("mu", format!("must lie in (0, 1], got {mu}")));
    }
    let ln = nf.ln();
    Ok((ln.ln() / ln).min(mu.powf(rho_h)) + nf.powf(-beta * rho_h) * ln.powi(3) + ln * ln / (mu * nf))
}
