//! Local estimator of `min_I H` and the global piecewise-linear estimator of `H`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::SamplePath;
use crate::variations::{check_beta, empirical_mean_v, filter_coeffs, indices_nu, variations_d, IntervalSpec};

/// Window schedule `θ_N` for the global estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Schedule {
    /// `κ_0 N^{-ζ p Λ} + 4(L+1) N^{-1} (log N)^2`; `zeta` defaults from `ρ_H`.
    Power {
        #[serde(default)]
        zeta: Option<f64>,
        p: f64,
    },
    /// `κ_0 / log N + 4(L+1) N^{-1} (log N)^2`.
    Log,
}

/// How strictly the interval-length condition of the local estimator is enforced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Require `λ(I) ≥ 4(L+1) N^{-1} (log N)^2`.
    #[default]
    Strict,
    /// Only require that `ν_N(I)` be well defined (`N ≥ (L+1)/λ(I)`).
    Relaxed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    #[serde(default = "default_beta")]
    pub beta: f64,
    pub filter_order: usize,
    #[serde(default = "default_schedule")]
    pub schedule: Schedule,
    /// Only consulted by oracle computations; the estimator never uses α.
    #[serde(default)]
    pub alpha_known: Option<f64>,
    #[serde(default)]
    pub regime: Regime,
}

fn default_beta() -> f64 {
    0.25
}

fn default_schedule() -> Schedule {
    Schedule::Log
}

impl EstimatorConfig {
    pub fn new(beta: f64, filter_order: usize) -> Result<Self> {
        let cfg = Self {
            beta,
            filter_order,
            schedule: default_schedule(),
            alpha_known: None,
            regime: Regime::Strict,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_schedule(mut self, schedule: Schedule) -> Result<Self> {
        self.schedule = schedule;
        self.validate()?;
        Ok(self)
    }

    pub fn relaxed(mut self) -> Self {
        self.regime = Regime::Relaxed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_beta(self.beta)?;
        filter_coeffs(self.filter_order)?;
        if let Schedule::Power { zeta, p } = self.schedule {
            if !(p > 0.0 && p <= 4.0) {
                return Err(Error::domain("p", format!("must lie in (0, 4], got {p}")));
            }
            if let Some(z) = zeta {
                if !(z > 0.0) {
                    return Err(Error::domain("zeta", format!("must be positive, got {z}")));
                }
            }
        }
        Ok(())
    }

    /// Whether `L > 2/β + 1`, the condition for almost-sure convergence.
    pub fn almost_sure_regime(&self) -> bool {
        self.filter_order as f64 > 2.0 / self.beta + 1.0
    }
}

/// `T_β(x) = min{2^β, max{x, 2^{β/2}}}`.
pub fn trunc_t(x: f64, beta: f64) -> f64 {
    let lo = 2f64.powf(beta / 2.0);
    let hi = 2f64.powf(beta);
    if x.is_nan() {
        return lo;
    }
    x.clamp(lo, hi)
}

/// `β^{-1} log2 T_β(ratio)`, always in `[1/2, 1]`.
pub fn hurst_from_ratio(ratio: f64, beta: f64) -> f64 {
    let x = trunc_t(ratio, beta);
    if x <= 2f64.powf(beta / 2.0) {
        0.5
    } else if x >= 2f64.powf(beta) {
        1.0
    } else {
        (x.log2() / beta).clamp(0.5, 1.0)
    }
}

/// Smallest `N ≥ 3` with `4(L+1)(log N)^2 / N ≤ λ`.
pub fn min_resolution(lambda: f64, order: usize) -> usize {
    let c = 4.0 * (order + 1) as f64;
    let mut n = 3usize;
    // past the hump at e^2 the left side decreases
    while n < 8 || c * (n as f64).ln().powi(2) / n as f64 > lambda {
        n += 1;
    }
    n
}

/// Check the interval-length condition for resolution `n`.
pub fn check_interval(interval: &IntervalSpec, n: usize, cfg: &EstimatorConfig) -> Result<()> {
    if n < 3 {
        return Err(Error::Precondition(format!("resolution N = {n} must be >= 3")));
    }
    if cfg.regime == Regime::Strict {
        let nf = n as f64;
        let need = 4.0 * (cfg.filter_order + 1) as f64 * nf.ln().powi(2) / nf;
        if interval.length() < need {
            return Err(Error::Precondition(format!(
                "interval length {} is below 4(L+1)(log N)^2/N = {need:.6} at N = {n}",
                interval.length()
            )));
        }
    }
    Ok(())
}

/// Variations of one path observed at `2N`, and of its coarsening at `N`.
#[derive(Debug, Clone)]
pub struct DualVariations {
    /// Coarse resolution N.
    pub n: usize,
    pub filter_order: usize,
    pub coarse: Vec<f64>,
    pub fine: Vec<f64>,
}

impl DualVariations {
    pub fn new(path: &SamplePath, order: usize) -> Result<Self> {
        let coarse_path = path.coarsen()?;
        Ok(Self {
            n: coarse_path.n,
            filter_order: order,
            coarse: variations_d(&coarse_path.values, order)?,
            fine: variations_d(&path.values, order)?,
        })
    }

    /// `(V_N^β(I), V_{2N}^β(I))`.
    pub fn means(&self, interval: &IntervalSpec, beta: f64) -> Result<(f64, f64)> {
        let nu = indices_nu(interval, self.n, self.filter_order)?;
        let nu2 = indices_nu(interval, 2 * self.n, self.filter_order)?;
        Ok((empirical_mean_v(&self.coarse, &nu, beta)?, empirical_mean_v(&self.fine, &nu2, beta)?))
    }

    /// `Ĥ_N^β(I)`.
    pub fn estimate(&self, interval: &IntervalSpec, cfg: &EstimatorConfig) -> Result<f64> {
        check_interval(interval, self.n, cfg)?;
        let (v_n, v_2n) = self.means(interval, cfg.beta)?;
        if v_2n == 0.0 {
            return Err(Error::Degenerate(format!(
                "V_2N vanishes on [{}, {}]",
                interval.lo, interval.hi
            )));
        }
        Ok(hurst_from_ratio(v_n / v_2n, cfg.beta))
    }
}

/// `Ĥ_N^β(I) = β^{-1} log2 T_β(V_N^β(I) / V_{2N}^β(I))` from a path observed
/// at resolution `2N` (`V_N` uses every second sample).
pub fn estimate_hmin(path: &SamplePath, interval: &IntervalSpec, cfg: &EstimatorConfig) -> Result<f64> {
    cfg.validate()?;
    DualVariations::new(path, cfg.filter_order)?.estimate(interval, cfg)
}

/// Smallest `N ≥ 3` with `9(L+1) N^{-1} (log N)^2 ≤ 1`.
pub fn n_zero(order: usize) -> Result<usize> {
    filter_coeffs(order)?;
    let c = 9.0 * (order + 1) as f64;
    let mut n = 3usize;
    while c * (n as f64).ln().powi(2) > n as f64 {
        n += 1;
    }
    Ok(n)
}

/// `κ_0 = (L+1) (log N_0)^2 / (2 N_0)`.
pub fn kappa_zero(order: usize) -> Result<f64> {
    let n0 = n_zero(order)? as f64;
    Ok(0.5 * (order + 1) as f64 * n0.ln().powi(2) / n0)
}

/// `Λ(L, β, p) = 2β(L-1) / ((p+4)β(L-1) + 2(p+1))`.
pub fn lambda_exponent(order: usize, beta: f64, p: f64) -> Result<f64> {
    check_beta(beta)?;
    filter_coeffs(order)?;
    if !(p > 0.0 && p <= 4.0) {
        return Err(Error::domain("p", format!("must lie in (0, 4], got {p}")));
    }
    let bl = beta * (order - 1) as f64;
    Ok(2.0 * bl / ((p + 4.0) * bl + 2.0 * (p + 1.0)))
}

/// The exponent `ζ` used by the power schedule.
pub fn power_zeta(order: usize, beta: f64, p: f64, zeta: Option<f64>, rho_h: Option<f64>) -> Result<f64> {
    let lam = lambda_exponent(order, beta, p)?;
    let cap = 1.0 / (3.0 - 4.0 * lam);
    let z = match (zeta, rho_h) {
        (Some(z), _) => z,
        (None, Some(rho)) => 1.0 / (3.0 - 4.0 * lam + p * rho),
        (None, None) => 0.5 * cap,
    };
    if !(z > 0.0 && z < cap) {
        return Err(Error::Schedule(format!("zeta = {z} must lie in (0, {cap})")));
    }
    Ok(z)
}

/// `θ_N` for the configured schedule.
pub fn theta_schedule(n: usize, cfg: &EstimatorConfig, rho_h: Option<f64>) -> Result<f64> {
    cfg.validate()?;
    let order = cfg.filter_order;
    let n0 = n_zero(order)?;
    if n < n0 {
        return Err(Error::Precondition(format!("N = {n} is below N_0 = {n0} for L = {order}")));
    }
    let nf = n as f64;
    let k0 = kappa_zero(order)?;
    let floor = 4.0 * (order + 1) as f64 * nf.ln().powi(2) / nf;
    let theta = match cfg.schedule {
        Schedule::Power { zeta, p } => {
            let lam = lambda_exponent(order, cfg.beta, p)?;
            let z = power_zeta(order, cfg.beta, p, zeta, rho_h)?;
            k0 * nf.powf(-z * p * lam) + floor
        }
        Schedule::Log => k0 / nf.ln() + floor,
    };
    if !(theta > 0.0 && theta <= 0.5) {
        return Err(Error::Schedule(format!("theta = {theta} lies outside (0, 1/2] at N = {n}")));
    }
    Ok(theta)
}

/// `[θ^{-1}]` with a 1e-12 guard against representation error.
pub fn window_count(theta: f64) -> Result<usize> {
    if !(theta > 0.0 && theta <= 0.5) {
        return Err(Error::domain("theta", format!("must lie in (0, 1/2], got {theta}")));
    }
    Ok((1.0 / theta + 1e-12).floor() as usize)
}

/// `I_n = [nθ, (n+1)θ]` for `n < [θ^{-1}] - 1`, and `[([θ^{-1}]-1)θ, 1]`.
pub fn partition_intervals(theta: f64) -> Result<Vec<IntervalSpec>> {
    let m = window_count(theta)?;
    let mut out: Vec<IntervalSpec> = (0..m - 1)
        .map(|i| IntervalSpec {
            lo: i as f64 * theta,
            hi: (i + 1) as f64 * theta,
        })
        .collect();
    out.push(IntervalSpec {
        lo: (m - 1) as f64 * theta,
        hi: 1.0,
    });
    Ok(out)
}

/// The continuous piecewise-linear estimate `H̃_{N,θ}^β`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HEstimate {
    pub theta: f64,
    pub knots_t: Vec<f64>,
    pub knots_h: Vec<f64>,
    pub beta: f64,
    pub filter_order: usize,
    /// Coarse resolution N of the data.
    pub n: usize,
    #[serde(default)]
    pub schedule: Option<Schedule>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl HEstimate {
    /// Assemble from the window estimates `Ĥ(I_0), …, Ĥ(I_{M-1})`.
    pub fn from_windows(theta: f64, window_h: Vec<f64>, beta: f64, filter_order: usize, n: usize) -> Result<Self> {
        let m = window_count(theta)?;
        if window_h.len() != m {
            return Err(Error::domain("window_h", format!("expected {m} ordinates, got {}", window_h.len())));
        }
        let mut knots_t: Vec<f64> = (0..m).map(|i| i as f64 * theta).collect();
        knots_t.push(1.0);
        let mut knots_h = window_h;
        knots_h.push(*knots_h.last().unwrap());
        Ok(Self {
            theta,
            knots_t,
            knots_h,
            beta,
            filter_order,
            n,
            schedule: None,
            seed: None,
        })
    }

    /// `H̃(t)` for `t ∈ [0, 1]`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::domain("t", format!("must lie in [0, 1], got {t}")));
        }
        Ok(self.eval_unchecked(t))
    }

    pub(crate) fn eval_unchecked(&self, t: f64) -> f64 {
        let kt = &self.knots_t;
        let i = kt.partition_point(|&k| k <= t).clamp(1, kt.len() - 1);
        let (t0, t1) = (kt[i - 1], kt[i]);
        let (h0, h1) = (self.knots_h[i - 1], self.knots_h[i]);
        if t == t0 {
            return h0;
        }
        let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        h0 + w * (h1 - h0)
    }

    /// Lipschitz constant of the interpolant, at most `θ^{-1}/2`.
    pub fn lipschitz(&self) -> f64 {
        self.knots_t
            .windows(2)
            .zip(self.knots_h.windows(2))
            .map(|(t, h)| (h[1] - h[0]).abs() / (t[1] - t[0]))
            .fold(0.0, f64::max)
    }
}

/// `H̃_{N,θ}^β` from a path observed at resolution `2N`.
pub fn estimate_h_function(path: &SamplePath, cfg: &EstimatorConfig, theta: f64) -> Result<HEstimate> {
    cfg.validate()?;
    let dual = DualVariations::new(path, cfg.filter_order)?;
    let windows = partition_intervals(theta)?;
    let hs: Vec<f64> = windows
        .par_iter()
        .map(|iv| dual.estimate(iv, cfg))
        .collect::<Result<_>>()?;
    let mut est = HEstimate::from_windows(theta, hs, cfg.beta, cfg.filter_order, dual.n)?;
    est.schedule = Some(cfg.schedule);
    est.seed = path.provenance.as_ref().map(|p| p.seed);
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn trunc_examples() {
        assert!((trunc_t(0.0, 0.25) - 2f64.powf(0.125)).abs() < 1e-15);
        assert!((trunc_t(0.0, 0.25) - 1.090_508).abs() < 1e-6);
        assert_eq!(trunc_t(10.0, 0.25), 2f64.powf(0.25));
        assert_eq!(trunc_t(1.12, 0.25), 1.12);
    }

    #[test]
    fn ratio_inversion() {
        assert!((hurst_from_ratio(2f64.powf(0.25 * 0.7), 0.25) - 0.7).abs() < 1e-14);
        assert_eq!(hurst_from_ratio(0.5, 0.25), 0.5);
        assert_eq!(hurst_from_ratio(4.0, 0.25), 1.0);
        assert_eq!(hurst_from_ratio(f64::NAN, 0.25), 0.5);
        assert_eq!(hurst_from_ratio(f64::INFINITY, 0.25), 1.0);
    }

    #[test]
    fn n_zero_is_minimal() {
        for order in 2..=13 {
            let n0 = n_zero(order).unwrap();
            let f = |n: usize| 9.0 * (order + 1) as f64 * (n as f64).ln().powi(2) / n as f64;
            assert!(f(n0) <= 1.0 && f(n0 - 1) > 1.0, "L={order}");
            assert!(n0 > 9 * (order + 1));
            assert!(kappa_zero(order).unwrap() <= 1.0 / 18.0);
        }
    }

    #[test]
    fn lambda_examples() {
        assert!((lambda_exponent(2, 0.25, 4.0).unwrap() - 0.5 / 12.0).abs() < 1e-15);
        let big = lambda_exponent(60, 0.25, 1.0).unwrap();
        assert!(big < 0.4 && big > 0.37);
        let vals: Vec<f64> = (2..30).map(|l| lambda_exponent(l, 0.2, 2.0).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]));
        assert!(vals.iter().all(|&v| v > 0.0 && v < 2.0 / 6.0));
    }

    #[test]
    fn partition_examples() {
        let p = partition_intervals(0.5).unwrap();
        assert_eq!(p, vec![IntervalSpec { lo: 0.0, hi: 0.5 }, IntervalSpec { lo: 0.5, hi: 1.0 }]);
        let q = partition_intervals(0.3).unwrap();
        assert_eq!(q.len(), 3);
        assert!((q[2].lo - 0.6).abs() < 1e-15 && q[2].hi == 1.0);
        assert_eq!(window_count(0.1).unwrap(), 10);
        assert!(partition_intervals(0.6).is_err());
    }

    #[test]
    fn schedule_errors() {
        let cfg = EstimatorConfig::new(0.25, 2).unwrap();
        assert!(matches!(theta_schedule(1000, &cfg, None), Err(Error::Precondition(_))));
        let n0 = n_zero(2).unwrap();
        let t = theta_schedule(n0, &cfg, None).unwrap();
        assert!(t <= 0.5);
        let t2 = theta_schedule(1 << 16, &cfg, None).unwrap();
        assert!(t2 < t);
    }

    #[test]
    fn interpolation_examples() {
        let e = HEstimate::from_windows(0.25, vec![0.6, 0.8, 0.7, 0.7], 0.25, 2, 1024).unwrap();
        assert_eq!(e.knots_t.len(), 5);
        assert!((e.eval(0.125).unwrap() - 0.7).abs() < 1e-15);
        assert_eq!(e.eval(0.25).unwrap(), 0.8);
        assert_eq!(e.eval(1.0).unwrap(), 0.7);
        assert!(e.eval(1.1).is_err());
        let flat = HEstimate::from_windows(0.3, vec![0.66; 3], 0.25, 2, 1024).unwrap();
        assert!((0..=100).all(|i| flat.eval(i as f64 / 100.0).unwrap() == 0.66));
    }

    #[test]
    fn degenerate_and_precondition() {
        let cfg = EstimatorConfig::new(0.25, 2).unwrap();
        let flat = SamplePath::new(vec![1.0; 4097]).unwrap();
        assert!(matches!(estimate_hmin(&flat, &IntervalSpec::unit(), &cfg), Err(Error::Degenerate(_))));
        let short = SamplePath::new((0..=64).map(|k| ((k * 7) % 5) as f64).collect()).unwrap();
        assert!(matches!(estimate_hmin(&short, &IntervalSpec::unit(), &cfg), Err(Error::Precondition(_))));
        assert!(estimate_hmin(&short, &IntervalSpec::unit(), &cfg.relaxed()).is_ok());
    }

    proptest! {
        #[test]
        fn trunc_is_clamp_and_lipschitz(x in -1.0f64..5.0, y in -1.0f64..5.0, beta in 0.01f64..0.25) {
            let (a, b) = (trunc_t(x, beta), trunc_t(y, beta));
            prop_assert!(a >= 2f64.powf(beta / 2.0) && a <= 2f64.powf(beta));
            prop_assert!((a - b).abs() <= (x - y).abs());
        }

        #[test]
        fn estimate_stays_in_range(values in proptest::collection::vec(-1e6f64..1e6, 300..400)) {
            let mut v = values;
            if v.len() % 2 == 0 { v.pop(); }
            let path = SamplePath::new(v).unwrap();
            let cfg = EstimatorConfig::new(0.25, 2).unwrap().relaxed();
            match estimate_hmin(&path, &IntervalSpec::unit(), &cfg) {
                Ok(h) => prop_assert!((0.5..=1.0).contains(&h)),
                Err(e) => prop_assert!(matches!(e, Error::Degenerate(_))),
            }
        }

        #[test]
        fn interpolant_is_lipschitz(theta in 0.02f64..0.5, seed in 0u64..1000) {
            let m = window_count(theta).unwrap();
            let hs: Vec<f64> = (0..m).map(|i| 0.5 + 0.5 * ((seed as f64 + i as f64 * 0.37).sin().abs())).collect();
            let e = HEstimate::from_windows(theta, hs, 0.25, 2, 1024).unwrap();
            prop_assert!(e.lipschitz() <= 0.5 / theta + 1e-12);
            let last = partition_intervals(theta).unwrap().pop().unwrap();
            prop_assert!(last.length() >= theta - 1e-12 && last.length() < 2.0 * theta);
        }
    }
}
