//! Self-checks bundling the exact identities and numerical invariants.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{estimate_hmin, hurst_from_ratio, partition_intervals, trunc_t, EstimatorConfig, HEstimate};
use crate::hurst::HurstSpec;
use crate::kernel::{check_localization, phi_alpha, KernelConfig, KernelNorms, PhiNormCache};
use crate::rng::seeded;
use crate::simulator::{field_at, sim_noise, simulate_path, simulate_with_noise, SamplePath, SimConfig};
use crate::stable::{moment_by_inversion, moment_constant, StableNoiseGrid};
use crate::variations::{expected_v_tilde, filter_coeffs, IntervalSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Algebra,
    Kernel,
    Oracle,
    Simulation,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Algebra, Suite::Kernel, Suite::Oracle, Suite::Simulation];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Algebra => "algebra",
            Suite::Kernel => "kernel",
            Suite::Oracle => "oracle",
            Suite::Simulation => "simulation",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| Error::config("suite", format!("unknown suite `{name}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("{tag} {}/{}: {}\n", self.suite.name(), c.name, c.measured));
        }
        out
    }
}

struct Checks(Vec<Check>);

impl Checks {
    fn add(&mut self, name: &str, outcome: Result<(bool, String)>) {
        let (passed, measured) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        self.0.push(Check {
            name: name.into(),
            passed,
            measured,
        });
    }
}

/// Run one suite. Failures are reported in the result, never returned as errors.
pub fn verify(suite: Suite) -> VerifyReport {
    let mut c = Checks(Vec::new());
    match suite {
        Suite::Algebra => algebra(&mut c),
        Suite::Kernel => kernel(&mut c),
        Suite::Oracle => oracle(&mut c),
        Suite::Simulation => simulation(&mut c),
    }
    VerifyReport { suite, checks: c.0 }
}

fn algebra(c: &mut Checks) {
    c.add("filter-moments", (|| {
        for order in 2..=8 {
            let a = filter_coeffs(order)?;
            for q in 0..=order as u32 {
                let m: i128 = a.iter().enumerate().map(|(l, &a)| a as i128 * (l as i128).pow(q)).sum();
                if (q < order as u32) != (m == 0) {
                    return Ok((false, format!("L={order} q={q}: moment {m}")));
                }
            }
        }
        Ok((true, "L = 2..8 exact".into()))
    })());

    c.add("trunc-clamp-lipschitz", (|| {
        let mut rng = seeded(1);
        let beta = 0.25;
        let (lo, hi) = (2f64.powf(beta / 2.0), 2f64.powf(beta));
        let mut worst: f64 = 0.0;
        for _ in 0..10_000 {
            let x: f64 = rng.random_range(-1.0..4.0);
            let y: f64 = rng.random_range(-1.0..4.0);
            let (a, b) = (trunc_t(x, beta), trunc_t(y, beta));
            if a < lo || a > hi {
                return Ok((false, format!("T({x}) = {a} outside the band")));
            }
            if (x - y).abs() > 0.0 {
                worst = worst.max((a - b).abs() / (x - y).abs());
            }
        }
        Ok((worst <= 1.0, format!("max difference quotient {worst:.6}")))
    })());

    c.add("estimate-range", (|| {
        let inputs = [0.0, -1.0, 1e-300, 1e300, f64::NAN, f64::INFINITY, 0.5, 4.0];
        let ok = inputs.iter().all(|&r| (0.5..=1.0).contains(&hurst_from_ratio(r, 0.25)));
        let spiky: Vec<f64> = (0..=2048).map(|k| if k % 97 == 0 { 1e12 } else { (k as f64).sin() }).collect();
        let h = estimate_hmin(&SamplePath::new(spiky)?, &IntervalSpec::unit(), &EstimatorConfig::new(0.25, 2)?)?;
        Ok((ok && (0.5..=1.0).contains(&h), format!("adversarial estimate {h:.4}")))
    })());

    c.add("partition", (|| {
        let mut rng = seeded(2);
        for _ in 0..1000 {
            let theta: f64 = rng.random_range(0.01..0.5);
            let p = partition_intervals(theta)?;
            let last = p.last().unwrap();
            let covers = p[0].lo == 0.0 && last.hi == 1.0 && p.windows(2).all(|w| w[0].hi == w[1].lo);
            let lengths = p[..p.len() - 1].iter().all(|i| (i.length() - theta).abs() < 1e-12);
            if !covers || !lengths || last.length() < theta - 1e-12 || last.length() >= 2.0 * theta {
                return Ok((false, format!("theta {theta}")));
            }
        }
        Ok((true, "1000 random theta".into()))
    })());

    c.add("interpolant-lipschitz", (|| {
        let mut rng = seeded(3);
        let theta = 0.07;
        let hs: Vec<f64> = (0..14).map(|_| rng.random_range(0.5..1.0)).collect();
        let est = HEstimate::from_windows(theta, hs, 0.25, 2, 1024)?;
        let mut worst: f64 = 0.0;
        for _ in 0..10_000 {
            let a: f64 = rng.random();
            let b: f64 = rng.random();
            if a != b {
                worst = worst.max((est.eval(a)? - est.eval(b)?).abs() / (a - b).abs());
            }
        }
        Ok((worst <= 1.0 / theta + 1e-12, format!("max quotient {worst:.4} vs 1/theta {:.4}", 1.0 / theta)))
    })());
}

fn kernel(c: &mut Checks) {
    c.add("support", (|| {
        for order in 2..=6 {
            let cfg = KernelConfig::new(1.5, order)?;
            for i in 0..50 {
                let u = order as f64 + i as f64 * 0.37;
                if phi_alpha(u, 0.8, &cfg)? != 0.0 {
                    return Ok((false, format!("L={order} u={u}")));
                }
            }
        }
        Ok((true, "Φ = 0 on [L, ∞) for L = 2..6".into()))
    })());

    c.add("localization", (|| {
        let cfg = KernelConfig::new(1.5, 2)?;
        let grid = [0.7, 0.8, 0.9, 0.97];
        let a = check_localization(&cfg, &grid, 1e3)?;
        let b = check_localization(&cfg, &grid, 1e4)?;
        let rel = (b - a).abs() / a;
        Ok((rel < 0.05, format!("sup {a:.6} -> {b:.6} (rel change {rel:.2e})")))
    })());

    c.add("norm-positive-lipschitz", (|| {
        let cache = PhiNormCache::new(KernelConfig::new(1.5, 3)?)?;
        let vs: Vec<f64> = (0..=20).map(|i| 0.68 + 0.3 * i as f64 / 20.0).collect();
        let norms = cache.norms(&vs)?;
        let h = 1e-3;
        let shifted: Vec<f64> = vs.iter().map(|v| v + h).collect();
        let norms_h = cache.norms(&shifted)?;
        let lip = norms
            .iter()
            .zip(&norms_h)
            .map(|(a, b)| (b - a).abs() / h)
            .fold(0.0, f64::max);
        let ok = norms.iter().all(|&n| n > 0.0) && lip.is_finite();
        Ok((ok, format!("min norm {:.4}, finite-difference Lipschitz {lip:.3}", norms.iter().copied().fold(f64::INFINITY, f64::min))))
    })());
}

fn oracle(c: &mut Checks) {
    c.add("constant-ratio", (|| {
        let cache = PhiNormCache::new(KernelConfig::new(1.5, 2)?)?;
        let mut worst: f64 = 0.0;
        for &h in &[0.7, 0.8, 0.9] {
            let spec = HurstSpec::constant(h)?;
            for &beta in &[0.1, 0.25] {
                let a = expected_v_tilde(&spec, &IntervalSpec::unit(), 1024, beta, &cache)?;
                let b = expected_v_tilde(&spec, &IntervalSpec::unit(), 2048, beta, &cache)?;
                worst = worst.max(((a / b) / 2f64.powf(beta * h) - 1.0).abs());
            }
        }
        Ok((worst < 1e-12, format!("max relative deviation {worst:.2e}")))
    })());

    c.add("moment-constant", (|| {
        let mut worst: f64 = 0.0;
        for &alpha in &[1.2, 1.5, 1.8] {
            for &p in &[0.1, 0.25, 0.5, 1.0] {
                let a = moment_constant(p, alpha)?;
                let b = moment_by_inversion(p, alpha)?;
                worst = worst.max((a / b - 1.0).abs());
            }
        }
        Ok((worst < 1e-8, format!("closed form vs inversion quadrature, max rel {worst:.2e}")))
    })());
}

fn simulation(c: &mut Checks) {
    c.add("origin-and-zero-noise", (|| {
        let cfg = SimConfig::new(1.5, 32, 4)?.with_trunc(1.0)?;
        let noise = sim_noise(&cfg, 1.0, 5)?;
        let zero = StableNoiseGrid::from_increments(1.5, noise.mesh, noise.origin, vec![0.0; noise.count()])?;
        let h = HurstSpec::sinusoidal(0.8, 0.05, 1.0)?;
        let y = simulate_with_noise(&zero, &h, &cfg, 1.0)?;
        let origin = field_at(&noise, 0.0, 0.8, &cfg)?;
        Ok((origin == 0.0 && y.values.iter().all(|&v| v == 0.0), "exact zeros".into()))
    })());

    c.add("fft-vs-direct", (|| {
        let cfg = SimConfig::new(1.5, 64, 4)?.with_trunc(1.0)?;
        let h = HurstSpec::sinusoidal(0.8, 0.1, 1.0)?;
        let noise = sim_noise(&cfg, 1.0, 9)?;
        let path = simulate_with_noise(&noise, &h, &cfg, 1.0)?;
        let mut worst: f64 = 0.0;
        for k in (1..=64).step_by(7) {
            let t = k as f64 / 64.0;
            worst = worst.max((path.values[k] - field_at(&noise, t, h.eval(t), &cfg)?).abs());
        }
        Ok((worst < 1e-10, format!("max abs difference {worst:.2e}")))
    })());

    c.add("determinism", (|| {
        let cfg = SimConfig::new(1.5, 256, 4)?;
        let h = HurstSpec::affine(0.7, 0.2)?;
        let a = simulate_path(&h, &cfg, 11)?;
        let b = simulate_path(&h, &cfg, 11)?;
        let same = a.values.iter().zip(&b.values).all(|(x, y)| x.to_bits() == y.to_bits());
        Ok((same, "bitwise identical re-run".into()))
    })());

    c.add("nested-meshes", (|| {
        let h = HurstSpec::constant(0.75)?;
        let fine = simulate_path(&h, &SimConfig::new(1.5, 128, 2)?.with_trunc(1.0)?, 4)?;
        let coarse = simulate_path(&h, &SimConfig::new(1.5, 64, 4)?.with_trunc(1.0)?, 4)?;
        let worst = (0..=64)
            .map(|k| (fine.values[2 * k] - coarse.values[k]).abs())
            .fold(0.0, f64::max);
        Ok((worst < 1e-10, format!("max abs difference {worst:.2e}")))
    })());
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass() {
        for s in Suite::ALL {
            let r = verify(s);
            assert!(r.passed(), "{}", r.render());
        }
    }

    #[test]
    fn suite_names_roundtrip() {
        for s in Suite::ALL {
            assert_eq!(Suite::parse(s.name()).unwrap(), s);
        }
        assert!(Suite::parse("nope").is_err());
    }
}
