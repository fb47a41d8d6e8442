//! Acceptance criteria A1–A8. Runs as a plain binary so every criterion
//! prints its PASS/FAIL line under `cargo test`.
//!
//! A6 cannot be met as stated (the log schedule with L = 13 exceeds 1/2 at
//! both requested resolutions). It is run faithfully and reported as FAIL;
//! the process exits non-zero only for failures outside that known set.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lmsm::estimator::{hurst_from_ratio, partition_intervals, trunc_t, window_count, HEstimate};
use lmsm::harness::{run_experiment, ExperimentConfig, ExperimentReport};
use lmsm::simulator::{discrete_variation_scale, exact_variation_scale};
use lmsm::variations::{expected_v_tilde, filter_coeffs};
use lmsm::{
    estimate_hmin, moment_constant, sample_sas, EstimatorConfig, HurstSpec, IntervalSpec, KernelConfig, PhiNormCache,
    SamplePath, SimConfig, StableParams,
};

const KNOWN_INFEASIBLE: &[&str] = &["A6"];

struct Outcome {
    id: &'static str,
    passed: bool,
    detail: String,
}

fn report(id: &'static str, passed: bool, detail: String, secs: f64) -> Outcome {
    println!("{} {id}: {detail} [{secs:.1}s]", if passed { "PASS" } else { "FAIL" });
    Outcome { id, passed, detail }
}

fn timed(id: &'static str, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let start = Instant::now();
    let (passed, detail) = f();
    report(id, passed, detail, start.elapsed().as_secs_f64())
}

fn experiment(json: serde_json::Value, dir: &std::path::Path) -> ExperimentReport {
    let mut value = json;
    value["outputs"] = dir.to_string_lossy().into_owned().into();
    let config = ExperimentConfig::from_json(&value.to_string()).expect("valid config");
    run_experiment(&config, None).expect("experiment runs")
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" > ")
}

// A1: exact algebra

fn a1() -> (bool, String) {
    let start = Instant::now();
    let mut fails = Vec::new();

    for order in 2..=8usize {
        let a = filter_coeffs(order).unwrap();
        let moment = |q: u32| -> i128 { a.iter().enumerate().map(|(l, &c)| c as i128 * (l as i128).pow(q)).sum() };
        if (0..order as u32).any(|q| moment(q) != 0) || moment(order as u32) == 0 {
            fails.push(format!("filter moments L={order}"));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for &beta in &[0.05, 0.1, 0.2, 0.25] {
        let (lo, hi) = (2f64.powf(beta / 2.0), 2f64.powf(beta));
        let xs: Vec<f64> = (0..10_000).map(|_| rng.random_range(-1.0..4.0)).collect();
        for w in xs.windows(2) {
            let (tx, ty) = (trunc_t(w[0], beta), trunc_t(w[1], beta));
            if !(lo..=hi).contains(&tx) || (tx - ty).abs() > (w[0] - w[1]).abs() {
                fails.push(format!("T_beta beta={beta} x={}", w[0]));
                break;
            }
        }
        for r in [0.0, 1e-300, 1.0, 1e300, f64::INFINITY, f64::NEG_INFINITY, f64::NAN] {
            let h = hurst_from_ratio(r, beta);
            if !(0.5..=1.0).contains(&h) {
                fails.push(format!("ratio {r} gave {h}"));
            }
        }
    }

    // adversarial paths through the full estimator
    let n = 4096;
    let adversarial: Vec<Vec<f64>> = vec![
        (0..=n).map(|k| if k == n / 2 { 1e6 } else { 0.0 }).collect(),
        (0..=n).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect(),
        (0..=n).map(|k| (k as f64).powi(3) + if k % 7 == 0 { 1e-3 } else { 0.0 }).collect(),
        (0..=n).map(|k| if k < n / 2 { 0.0 } else { 1.0 }).collect(),
        (0..=n).map(|_| rng.random_range(-1.0..1.0) / rng.random_range(1e-9..1.0)).collect(),
        (0..=n).map(|k| (k as f64 / n as f64).sqrt() * 1e-200).collect(),
    ];
    let cfg = EstimatorConfig::new(0.25, 2).unwrap();
    for (i, values) in adversarial.into_iter().enumerate() {
        let path = SamplePath::new(values).unwrap();
        for (lo, hi) in [(0.0, 1.0), (0.25, 0.75)] {
            match estimate_hmin(&path, &IntervalSpec::new(lo, hi).unwrap(), &cfg) {
                Ok(h) if (0.5..=1.0).contains(&h) => {}
                Ok(h) => fails.push(format!("adversarial path {i} gave {h}")),
                Err(lmsm::Error::Degenerate(_)) => {}
                Err(e) => fails.push(format!("adversarial path {i}: {e}")),
            }
        }
    }

    for _ in 0..200 {
        let theta = rng.random_range(1e-3..=0.5);
        let parts = partition_intervals(theta).unwrap();
        let m = window_count(theta).unwrap();
        let contiguous = parts.windows(2).all(|w| w[0].hi == w[1].lo);
        let last = parts.last().unwrap().length();
        let ok = parts.len() == m
            && parts[0].lo == 0.0
            && parts[m - 1].hi == 1.0
            && contiguous
            && last >= theta - 1e-12
            && last < 2.0 * theta + 1e-12;
        if !ok {
            fails.push(format!("partition theta={theta}"));
        }

        let heights: Vec<f64> = (0..m).map(|_| rng.random_range(0.5..=1.0)).collect();
        let est = HEstimate::from_windows(theta, heights, 0.25, 2, 1024).unwrap();
        for _ in 0..50 {
            let (s, t) = (rng.random_range(0.0..=1.0), rng.random_range(0.0..=1.0));
            let diff = (est.eval(s).unwrap() - est.eval(t).unwrap()).abs();
            if diff > (s - t).abs() / theta * (1.0 + 1e-12) + 1e-12 {
                fails.push(format!("interpolant Lipschitz theta={theta} s={s} t={t}"));
            }
        }
    }

    let secs = start.elapsed().as_secs_f64();
    if secs >= 5.0 {
        fails.push(format!("runtime {secs:.2}s"));
    }
    let passed = fails.is_empty();
    let detail = if passed {
        "filter moments L=2..8, T_beta on 4x10^4 points, adversarial estimates, 10^4 Lipschitz pairs, partitions".to_string()
    } else {
        fails.join("; ")
    };
    (passed, detail)
}

// A2: LFSM recovery

fn a2(dir: &std::path::Path) -> (bool, String) {
    let report = experiment(
        serde_json::json!({
            "kind": "local-interval",
            "model": { "alpha": 1.5, "hurst": { "family": "constant", "h": 0.7 } },
            "sim": { "substeps": 16 },
            "estimator": { "beta": 0.25, "filter_order": 5, "regime": "relaxed" },
            "ns": [1024, 4096, 16384],
            "replicates": 50,
            "master_seed": 20_250_101,
            "outputs": "",
            "interval": { "lo": 0.0, "hi": 1.0 }
        }),
        dir,
    );
    let errors: Vec<f64> = report.aggregates.iter().map(|a| a.mean_error).collect();
    let excluded = report.excluded();
    let last = *errors.last().unwrap();
    let passed = excluded == 0 && strictly_decreasing(&errors) && last <= 0.05;
    (passed, format!("mean |H_N - 0.7| = {} (limit 0.05), excluded {excluded}", fmt_list(&errors)))
}

// A3: exact ratio oracle

fn a3() -> (bool, String) {
    let iv = IntervalSpec::unit();
    let mut worst: f64 = 0.0;
    for order in [2, 5] {
        let norms = PhiNormCache::new(KernelConfig::new(1.5, order).unwrap()).unwrap();
        for h0 in [0.7, 0.75, 0.8, 0.85, 0.9] {
            let h = HurstSpec::constant(h0).unwrap();
            for beta in [0.05, 0.15, 0.25] {
                let e1 = expected_v_tilde(&h, &iv, 1000, beta, &norms).unwrap();
                let e2 = expected_v_tilde(&h, &iv, 2000, beta, &norms).unwrap();
                let want = 2f64.powf(beta * h0);
                worst = worst.max((e1 / e2 / want - 1.0).abs());
            }
        }
    }
    (worst < 1e-10, format!("max relative deviation from 2^(beta H) {worst:.2e} over 5x3 grid, L in {{2, 5}}"))
}

// A4: scale identity of the frozen variations

fn random_hurst(rng: &mut ChaCha8Rng) -> HurstSpec {
    match rng.random_range(0..4) {
        0 => HurstSpec::constant(rng.random_range(0.7..0.95)).unwrap(),
        1 => {
            let a = rng.random_range(0.7..0.8);
            HurstSpec::affine(a, rng.random_range(0.0..0.15)).unwrap()
        }
        2 => HurstSpec::sinusoidal(rng.random_range(0.78..0.85), rng.random_range(0.01..0.08), rng.random_range(0.5..3.0))
            .unwrap(),
        _ => HurstSpec::piecewise_linear(
            vec![0.0, 0.5, 1.0],
            vec![rng.random_range(0.7..0.95), rng.random_range(0.7..0.95), rng.random_range(0.7..0.95)],
        )
        .unwrap(),
    }
}

fn a4() -> (bool, String) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let alpha = 1.5;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let h = random_hurst(&mut rng);
        let n = [256, 1024, 4096][rng.random_range(0..3)];
        let order = rng.random_range(2..=5);
        let k = rng.random_range(0..=n - order);
        let cfg = SimConfig::new(alpha, n, 32).unwrap();
        let trunc = cfg.resolve_trunc(&h).unwrap();
        let discrete = discrete_variation_scale(k, &h, order, &cfg, trunc).unwrap();
        let exact = exact_variation_scale(k, n, &h, order, alpha).unwrap();
        worst = worst.max((discrete / exact - 1.0).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    (worst < 0.02 && secs < 120.0, format!("max relative scale error {:.3}% over 20 cases (limit 2%)", 100.0 * worst))
}

// A5: minimum plateau of the oracle estimator

fn a5(dir: &std::path::Path) -> (bool, String) {
    let ns: Vec<usize> = (10..=16).map(|e| 1usize << e).collect();
    // 1/alpha must lie below min H = 0.6
    let report = experiment(
        serde_json::json!({
            "kind": "ratio-oracle",
            "model": { "alpha": 1.8, "hurst": { "family": "affine-clipped", "intercept": 0.6, "slope": 0.2, "lo": 0.0, "hi": 1.0 } },
            "estimator": { "beta": 0.25, "filter_order": 2 },
            "ns": ns,
            "replicates": 1,
            "master_seed": 5,
            "outputs": "",
            "interval": { "lo": 0.2, "hi": 0.8 }
        }),
        dir,
    );
    let errors: Vec<f64> = report.rows.iter().map(|r| r.values[0]).collect();
    let target = report.rows[0].values[2];
    let tn: Vec<f64> = report.rows.iter().map(|r| r.values[4]).collect();
    // constant fitted on the first three resolutions, checked on all
    let c = errors.iter().zip(&tn).take(3).map(|(e, t)| e / t).fold(0.0, f64::max);
    let bounded = errors.iter().zip(&tn).all(|(e, t)| *e <= c * t);
    let passed = (target - 0.64).abs() < 1e-9 && strictly_decreasing(&errors) && bounded;
    (
        passed,
        format!(
            "target min H = {target:.4}; |oracle - target| = {}; C = {c:.3}, bounded by C T_N: {bounded}",
            fmt_list(&errors)
        ),
    )
}

// A6: global estimator trend

fn global_config(ns: &[usize], substeps: usize, kind: &str, replicates: usize) -> serde_json::Value {
    serde_json::json!({
        "kind": kind,
        "model": { "alpha": 1.5, "hurst": { "family": "sinusoidal", "mean": 0.82, "amplitude": 0.1, "frequency": 1.0 } },
        "sim": { "substeps": substeps },
        "estimator": { "beta": 0.25, "filter_order": 13, "schedule": { "kind": "log" } },
        "ns": ns,
        "replicates": replicates,
        "master_seed": 6,
        "outputs": "",
        "holder_b": 0.3
    })
}

fn global_trend(ns: &[usize], substeps: usize, dir: &std::path::Path) -> (bool, String) {
    let report = experiment(global_config(ns, substeps, "global-holder", 20), dir);
    if report.excluded() > 0 {
        let status = report.rows.iter().find(|r| !r.ok()).map(|r| r.status.clone()).unwrap_or_default();
        return (false, format!("{} of {} rows failed: {status}", report.excluded(), report.rows.len()));
    }
    let mean = |col: usize, n: usize| {
        let vals: Vec<f64> = report.rows.iter().filter(|r| r.n == n).map(|r| r.values[col]).collect();
        vals.iter().sum::<f64>() / vals.len() as f64
    };
    let holder: Vec<f64> = ns.iter().map(|&n| mean(0, n)).collect();
    let uniform: Vec<f64> = ns.iter().map(|&n| mean(1, n)).collect();
    let passed = strictly_decreasing(&uniform) && strictly_decreasing(&holder);
    (passed, format!("sup error {}; Hölder(0.3) error {}", fmt_list(&uniform), fmt_list(&holder)))
}

// A7: stable sampler

fn a7() -> (bool, String) {
    let mut fails = Vec::new();
    let mut worst_z: f64 = 0.0;
    let n = 1_000_000;
    for (i, alpha) in [1.2, 1.5, 1.8].into_iter().enumerate() {
        let params = StableParams::standard(alpha).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(70 + i as u64);
        let xs: Vec<f64> = (0..n).map(|_| sample_sas(&params, &mut rng).unwrap()).collect();
        for xi in [0.5, 1.0, 2.0] {
            let phi = |s: f64| (-f64::powf(s, alpha)).exp();
            let ecf = xs.iter().map(|x| (xi * x).cos()).sum::<f64>() / n as f64;
            // Var cos(ξX) = (1 + φ(2ξ))/2 - φ(ξ)^2
            let se = (((1.0 + phi(2.0 * xi)) / 2.0 - phi(xi).powi(2)) / n as f64).sqrt();
            let z = (ecf - phi(xi)).abs() / se;
            worst_z = worst_z.max(z);
            if z > 4.0 {
                fails.push(format!("ECF alpha={alpha} xi={xi}: {z:.2} SE"));
            }
        }
    }

    let mut worst_rel: f64 = 0.0;
    for alpha in [1.2, 1.5, 1.8] {
        for p in [0.1, 0.25, 0.5, 1.0] {
            let closed = moment_constant(p, alpha).unwrap();
            let (mc, se) = moment_oracle(p, alpha, 1_000_000, 700 + (100.0 * alpha + p * 10.0) as u64);
            let rel = (closed / mc - 1.0).abs();
            worst_rel = worst_rel.max(rel);
            if rel > 0.01 || se / mc > 2e-3 {
                fails.push(format!("c({p}) alpha={alpha}: closed {closed:.6} vs MC {mc:.6} ± {se:.1e}"));
            }
        }
    }
    let passed = fails.is_empty();
    let detail = if passed {
        format!("ECF max {worst_z:.2} SE (limit 4); c(p) vs MC oracle max rel {:.3}% (limit 1%)", 100.0 * worst_rel)
    } else {
        fails.join("; ")
    };
    (passed, detail)
}

/// Importance-sampled Monte Carlo for `E|X|^p` from the characteristic
/// function: `E|X|^p = K_p ∫_0^∞ (1 - e^{-ξ^α}) ξ^{-1-p} dξ` with
/// `K_p = (2/π) Γ(1+p) sin(πp/2)`. The proposal has density proportional to
/// `ξ^{α-1-p}` on (0,1) and `ξ^{-1-p}` on (1,∞), which keeps weights bounded.
fn moment_oracle(p: f64, alpha: f64, n: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = (alpha - p, p);
    // unnormalized masses of the two pieces: ∫_0^1 ξ^{a-1} = 1/a, ∫_1^∞ ξ^{-1-b} = 1/b
    let (m0, m1) = (1.0 / a, 1.0 / b);
    let w0 = m0 / (m0 + m1);
    let total = m0 + m1;
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    for _ in 0..n {
        let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
        let xi = if rng.random::<f64>() < w0 { u.powf(1.0 / a) } else { u.powf(-1.0 / b) };
        let q = if xi < 1.0 { xi.powf(a - 1.0) } else { xi.powf(-1.0 - b) } / total;
        let g = -(-xi.powf(alpha)).exp_m1() * xi.powf(-1.0 - p);
        let w = g / q;
        sum += w;
        sum2 += w * w;
    }
    let mean = sum / n as f64;
    let se = ((sum2 / n as f64 - mean * mean) / n as f64).sqrt();
    let k = 2.0 / PI * statrs::function::gamma::gamma(1.0 + p) * (PI * p / 2.0).sin();
    (k * mean, k * se)
}

// A8: determinism across worker counts

fn a8(dir: &std::path::Path) -> (bool, String) {
    let configs = [
        serde_json::json!({
            "kind": "global-uniform",
            "model": { "alpha": 1.6, "hurst": { "family": "sinusoidal", "mean": 0.8, "amplitude": 0.1, "frequency": 1.0 } },
            "sim": { "substeps": 4 },
            "estimator": { "beta": 0.25, "filter_order": 2, "regime": "relaxed" },
            "ns": [512, 1024],
            "replicates": 5,
            "master_seed": 8,
            "outputs": "",
            "theta": 0.25
        }),
        serde_json::json!({
            "kind": "local-interval",
            "model": { "alpha": 1.5, "hurst": { "family": "constant", "h": 0.75 } },
            "sim": { "substeps": 4 },
            "estimator": { "beta": 0.25, "filter_order": 3, "regime": "relaxed" },
            "ns": [256, 1024],
            "replicates": 6,
            "master_seed": 88,
            "outputs": "",
            "interval": { "lo": 0.25, "hi": 0.75 }
        }),
    ];
    let mut identical = true;
    let mut files = 0;
    for (i, json) in configs.into_iter().enumerate() {
        let mut outputs = Vec::new();
        for jobs in [1usize, 2, 5] {
            let sub = dir.join(format!("{i}-{jobs}"));
            let mut value = json.clone();
            value["outputs"] = sub.to_string_lossy().into_owned().into();
            let config = ExperimentConfig::from_json(&value.to_string()).unwrap();
            let report = run_experiment(&config, Some(jobs)).unwrap();
            report.write(&config, &sub).unwrap();
            let read = |name: &str| std::fs::read(sub.join(name)).unwrap();
            outputs.push((read(&format!("{}.csv", config.kind.name())), read("rates.csv")));
        }
        files += 2;
        identical &= outputs.windows(2).all(|w| w[0] == w[1]);
    }
    (identical, format!("{files} CSV files compared across 1, 2 and 5 workers: byte-identical = {identical}"))
}

fn main() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let sub = |name: &str| tmp.path().join(name);
    let mut outcomes = vec![
        timed("A1", a1),
        timed("A2", || a2(&sub("a2"))),
        timed("A3", a3),
        timed("A4", a4),
        timed("A5", || a5(&sub("a5"))),
        timed("A6", || global_trend(&[1 << 11, 1 << 13], 16, &sub("a6"))),
    ];
    // Not a criterion: the A6 setup at the smallest resolutions where the
    // log schedule with L = 13 is defined, with fewer substeps.
    let supp = timed("A6-supplementary", || global_trend(&[1 << 14, 1 << 16], 8, &sub("a6s")));
    outcomes.push(timed("A7", a7));
    outcomes.push(timed("A8", || a8(&sub("a8"))));

    let passed = outcomes.iter().filter(|o| o.passed).count();
    println!("{passed}/{} criteria passed (supplementary A6 check: {})", outcomes.len(), if supp.passed { "PASS" } else { "FAIL" });
    let unexpected: Vec<&Outcome> = outcomes.iter().filter(|o| !o.passed && !KNOWN_INFEASIBLE.contains(&o.id)).collect();
    for o in &unexpected {
        eprintln!("unexpected failure {}: {}", o.id, o.detail);
    }
    if !unexpected.is_empty() {
        std::process::exit(1);
    }
}
