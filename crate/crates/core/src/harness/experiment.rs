//! Config-driven Monte Carlo experiments.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::estimator::{estimate_h_function, estimate_hmin, hurst_from_ratio, theta_schedule, EstimatorConfig};
use crate::hurst::{HurstFamily, HurstSpec};
use crate::io::{csv_bytes, json_bytes, write_atomic};
use crate::kernel::{KernelConfig, PhiNormCache};
use crate::metrics::{bound_rhs_global, bound_rhs_local, eval_tn, fit_rate, holder_error, interval_min_h, uniform_error, RateFit};
use crate::rng::{derive_seed, seeded};
use crate::simulator::{discrete_variation_scale, exact_variation_scale, simulate_path, SimConfig};
use crate::variations::{expected_v_tilde, IntervalSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Error of the local estimator `Ĥ_N(I)` against `min_I H`.
    LocalInterval,
    /// Uniform error of the global estimator.
    GlobalUniform,
    /// Uniform and Hölder errors of the global estimator.
    GlobalHolder,
    /// Deterministic estimator built from `E Ṽ_N / E Ṽ_2N`.
    RatioOracle,
    /// Discretized scale of `d̃_{N,k}` against `N^{-H} ‖Φ_α‖`.
    KernelVerify,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::LocalInterval => "local-interval",
            Self::GlobalUniform => "global-uniform",
            Self::GlobalHolder => "global-holder",
            Self::RatioOracle => "ratio-oracle",
            Self::KernelVerify => "kernel-verify",
        }
    }

    /// Value columns after `N,replicate,seed`; the first is the error metric.
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Self::LocalInterval => &["error", "estimate", "target"],
            Self::GlobalUniform => &["error", "theta", "windows"],
            Self::GlobalHolder => &["error", "uniform_error", "theta", "windows"],
            Self::RatioOracle => &["error", "oracle_estimate", "target", "expected_ratio", "tn"],
            Self::KernelVerify => &["error", "k", "v", "discrete_scale", "exact_scale"],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub alpha: f64,
    pub hurst: HurstFamily,
    /// Hölder order of `H`; defaults to 1 for the built-in families.
    #[serde(default)]
    pub rho_h: Option<f64>,
}

impl ModelConfig {
    pub fn hurst_spec(&self) -> Result<HurstSpec> {
        let mut h = HurstSpec::new(self.hurst.clone()).map_err(|e| Error::config("model.hurst", e.to_string()))?;
        if let Some(rho) = self.rho_h {
            h.rho_h = rho;
        }
        h.validate_for(self.alpha).map_err(|e| Error::config("model", e.to_string()))?;
        Ok(h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimDefaults {
    #[serde(default = "default_substeps")]
    pub substeps: usize,
    #[serde(default)]
    pub trunc_t: Option<f64>,
    #[serde(default = "default_tail_tol")]
    pub tail_tol: f64,
}

fn default_substeps() -> usize {
    16
}

fn default_tail_tol() -> f64 {
    1e-3
}

impl Default for SimDefaults {
    fn default() -> Self {
        Self {
            substeps: default_substeps(),
            trunc_t: None,
            tail_tol: default_tail_tol(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub model: ModelConfig,
    #[serde(default)]
    pub sim: SimDefaults,
    pub estimator: EstimatorConfig,
    /// Coarse resolutions N; simulated paths have 2N steps.
    pub ns: Vec<usize>,
    pub replicates: usize,
    pub master_seed: u64,
    pub outputs: PathBuf,
    /// Interval for local-interval and ratio-oracle experiments.
    #[serde(default)]
    pub interval: Option<IntervalSpec>,
    /// Fixed window width; otherwise taken from the estimator's schedule.
    #[serde(default)]
    pub theta: Option<f64>,
    /// Hölder order for global-holder experiments.
    #[serde(default = "default_holder_b")]
    pub holder_b: f64,
    /// Evaluation grid for error norms.
    #[serde(default = "default_grid")]
    pub grid: usize,
    /// Moment order p of the local bound overlay.
    #[serde(default = "default_bound_p")]
    pub bound_p: f64,
}

fn default_holder_b() -> f64 {
    0.3
}

fn default_grid() -> usize {
    2001
}

fn default_bound_p() -> f64 {
    1.0
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::config("$", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.hurst_spec()?;
        self.estimator
            .validate()
            .map_err(|e| Error::config("estimator", e.to_string()))?;
        if self.ns.is_empty() {
            return Err(Error::config("ns", "must not be empty"));
        }
        if self.ns.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("ns", "must be strictly ascending"));
        }
        if let Some(i) = self.ns.iter().position(|&n| n < 3) {
            return Err(Error::config(format!("ns[{i}]"), "resolutions must be >= 3"));
        }
        if self.replicates == 0 {
            return Err(Error::config("replicates", "must be >= 1"));
        }
        if self.sim.substeps == 0 {
            return Err(Error::config("sim.substeps", "must be >= 1"));
        }
        if let Some(t) = self.sim.trunc_t {
            if !(t > 0.0) {
                return Err(Error::config("sim.trunc_t", "must be positive"));
            }
        }
        if let Some(iv) = self.interval {
            IntervalSpec::new(iv.lo, iv.hi).map_err(|e| Error::config("interval", e.to_string()))?;
        }
        if let Some(t) = self.theta {
            if !(t > 0.0 && t <= 0.5) {
                return Err(Error::config("theta", "must lie in (0, 1/2]"));
            }
        }
        if !(self.holder_b > 0.0 && self.holder_b <= 1.0) {
            return Err(Error::config("holder_b", "must lie in (0, 1]"));
        }
        if self.grid < 2 {
            return Err(Error::config("grid", "must be >= 2"));
        }
        if !(self.bound_p > 0.0 && self.bound_p <= 4.0) {
            return Err(Error::config("bound_p", "must lie in (0, 4]"));
        }
        Ok(())
    }

    fn interval(&self) -> IntervalSpec {
        self.interval.unwrap_or_else(IntervalSpec::unit)
    }

    fn sim_config(&self, n: usize) -> SimConfig {
        SimConfig {
            alpha: self.model.alpha,
            n,
            substeps: self.sim.substeps,
            trunc_t: self.sim.trunc_t,
            tail_tol: self.sim.tail_tol,
        }
    }
}

/// One (N, replicate) row. Failed rows carry NaN values and a diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub n: usize,
    pub replicate: usize,
    pub seed: u64,
    pub values: Vec<f64>,
    pub status: String,
}

impl Row {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn error(&self) -> f64 {
        self.values[0]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub n: usize,
    pub mean_error: f64,
    pub successes: usize,
    pub excluded: usize,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub rows: Vec<Row>,
    pub aggregates: Vec<Aggregate>,
    pub rate_fit: Option<RateFit>,
    pub wall_clock_seconds: f64,
    pub version: String,
    pub config_hash: String,
    pub input_hash: String,
}

impl ExperimentReport {
    pub fn excluded(&self) -> usize {
        self.rows.iter().filter(|r| !r.ok()).count()
    }

    pub fn rows_csv(&self) -> Result<Vec<u8>> {
        let mut header = vec!["N", "replicate", "seed"];
        header.extend_from_slice(self.kind.columns());
        header.push("status");
        csv_bytes(
            &header,
            self.rows.iter().map(|r| {
                let mut rec = vec![r.n.to_string(), r.replicate.to_string(), r.seed.to_string()];
                rec.extend(r.values.iter().map(|v| v.to_string()));
                rec.push(r.status.clone());
                rec
            }),
        )
    }

    pub fn rates_csv(&self) -> Result<Vec<u8>> {
        csv_bytes(
            &["N", "error", "bound"],
            self.aggregates
                .iter()
                .map(|a| vec![a.n.to_string(), a.mean_error.to_string(), a.bound.to_string()]),
        )
    }

    pub fn manifest(&self, config: &ExperimentConfig) -> serde_json::Value {
        serde_json::json!({
            "kind": self.kind.name(),
            "version": self.version,
            "config_hash": self.config_hash,
            "input_hash": self.input_hash,
            "wall_clock_seconds": self.wall_clock_seconds,
            "rows": self.rows.len(),
            "excluded_rows": self.excluded(),
            "aggregates": self.aggregates,
            "rate_fit": self.rate_fit,
            "config": config,
            "files": [format!("{}.csv", self.kind.name()), "rates.csv", "manifest.json"],
        })
    }

    /// Write `<kind>.csv`, `rates.csv` and `manifest.json` into `dir`.
    pub fn write(&self, config: &ExperimentConfig, dir: &Path) -> Result<()> {
        write_atomic(&dir.join(format!("{}.csv", self.kind.name())), &self.rows_csv()?)?;
        write_atomic(&dir.join("rates.csv"), &self.rates_csv()?)?;
        write_atomic(&dir.join("manifest.json"), &json_bytes(&self.manifest(config))?)
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 of the canonical JSON form of the configuration.
pub fn config_hash(config: &ExperimentConfig) -> Result<String> {
    let canon = serde_json::to_vec(config)?;
    Ok(hex(&Sha256::digest(&canon)))
}

/// Git-style content hash: SHA-256 of `blob <len>\0` followed by the bytes.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex(&h.finalize())
}

fn nan_row(config: &ExperimentConfig, n: usize, replicate: usize, seed: u64, err: &Error) -> Row {
    Row {
        n,
        replicate,
        seed,
        values: vec![f64::NAN; config.kind.columns().len()],
        status: format!("error: {err}"),
    }
}

struct Shared {
    h: HurstSpec,
    norms: Option<PhiNormCache>,
}

fn run_row(config: &ExperimentConfig, shared: &Shared, n: usize, seed: u64) -> Result<Vec<f64>> {
    let h = &shared.h;
    let est = &config.estimator;
    match config.kind {
        ExperimentKind::LocalInterval => {
            let iv = config.interval();
            let path = simulate_path(h, &config.sim_config(2 * n), seed)?;
            let estimate = estimate_hmin(&path, &iv, est)?;
            let target = interval_min_h(h, &iv, config.grid)?;
            Ok(vec![(estimate - target).abs(), estimate, target])
        }
        ExperimentKind::GlobalUniform | ExperimentKind::GlobalHolder => {
            let theta = match config.theta {
                Some(t) => t,
                None => theta_schedule(n, est, config.model.rho_h.or(Some(h.rho_h)))?,
            };
            let path = simulate_path(h, &config.sim_config(2 * n), seed)?;
            let estimate = estimate_h_function(&path, est, theta)?;
            let windows = (estimate.knots_t.len() - 1) as f64;
            let uni = uniform_error(&estimate, h, config.grid)?;
            if config.kind == ExperimentKind::GlobalUniform {
                Ok(vec![uni, theta, windows])
            } else {
                let hol = holder_error(&estimate, h, config.holder_b, config.grid)?;
                Ok(vec![hol, uni, theta, windows])
            }
        }
        ExperimentKind::RatioOracle => {
            let iv = config.interval();
            let norms = shared.norms.as_ref().expect("norm cache");
            let e_n = expected_v_tilde(h, &iv, n, est.beta, norms)?;
            let e_2n = expected_v_tilde(h, &iv, 2 * n, est.beta, norms)?;
            let ratio = e_n / e_2n;
            let oracle = hurst_from_ratio(ratio, est.beta);
            let target = interval_min_h(h, &iv, config.grid)?;
            let tn = eval_tn(n, iv.length(), est.beta, h.rho_h)?;
            Ok(vec![(oracle - target).abs(), oracle, target, ratio, tn])
        }
        ExperimentKind::KernelVerify => {
            let order = est.filter_order;
            if n < order + 1 {
                return Err(Error::Precondition(format!("N = {n} is below L + 1")));
            }
            let k = seeded(seed).random_range(0..=n - order);
            let sim = config.sim_config(n);
            let trunc = sim.resolve_trunc(h)?;
            let discrete = discrete_variation_scale(k, h, order, &sim, trunc)?;
            let exact = exact_variation_scale(k, n, h, order, config.model.alpha)?;
            let v = h.eval(k as f64 / n as f64);
            Ok(vec![(discrete / exact - 1.0).abs(), k as f64, v, discrete, exact])
        }
    }
}

fn bound_for(config: &ExperimentConfig, h: &HurstSpec, n: usize, rows: &[&Row]) -> f64 {
    let est = &config.estimator;
    let iv = config.interval();
    let value = match config.kind {
        ExperimentKind::LocalInterval => bound_rhs_local(n, &iv, config.bound_p, est.beta, est.filter_order, h.rho_h, h.h_max),
        ExperimentKind::GlobalUniform | ExperimentKind::GlobalHolder => {
            let theta = rows
                .iter()
                .find(|r| r.ok())
                .map(|r| r.values[if config.kind == ExperimentKind::GlobalUniform { 1 } else { 2 }])
                .unwrap_or(f64::NAN);
            bound_rhs_global(n, theta, est.beta, est.filter_order, h.rho_h, h.h_max)
        }
        ExperimentKind::RatioOracle => eval_tn(n, iv.length(), est.beta, h.rho_h),
        ExperimentKind::KernelVerify => Ok(f64::NAN),
    };
    value.unwrap_or(f64::NAN)
}

/// Run an experiment on a pool of `jobs` workers (all cores when `None`).
///
/// Row seeds are `derive_seed(master_seed, [N, replicate])`, so the report is
/// the same for any worker count. Failed rows are kept with NaN values.
pub fn run_experiment(config: &ExperimentConfig, jobs: Option<usize>) -> Result<ExperimentReport> {
    config.validate()?;
    let started = Instant::now();
    let h = config.model.hurst_spec()?;
    let norms = if config.kind == ExperimentKind::RatioOracle {
        let kc = KernelConfig::new(config.model.alpha, config.estimator.filter_order)
            .map_err(|e| Error::config("estimator.filter_order", e.to_string()))?;
        Some(PhiNormCache::new(kc)?)
    } else {
        None
    };
    let shared = Shared { h: h.clone(), norms };

    let tasks: Vec<(usize, usize, u64)> = config
        .ns
        .iter()
        .flat_map(|&n| {
            (0..config.replicates).map(move |r| (n, r, derive_seed(config.master_seed, &[n as u64, r as u64])))
        })
        .collect();

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = builder.build().map_err(|e| Error::Io(e.to_string()))?;

    let rows: Vec<Row> = pool.install(|| {
        let compute = |&(n, r, seed): &(usize, usize, u64)| match run_row(config, &shared, n, seed) {
            Ok(values) => Row {
                n,
                replicate: r,
                seed,
                values,
                status: "ok".into(),
            },
            Err(e) => nan_row(config, n, r, seed, &e),
        };
        if config.kind == ExperimentKind::RatioOracle {
            // deterministic: evaluate once per N and repeat for each replicate
            config
                .ns
                .par_iter()
                .map(|&n| {
                    let first = tasks.iter().find(|t| t.0 == n).unwrap();
                    let base = compute(first);
                    tasks
                        .iter()
                        .filter(|t| t.0 == n)
                        .map(|&(n, r, seed)| Row { n, replicate: r, seed, ..base.clone() })
                        .collect::<Vec<_>>()
                })
                .collect::<Vec<_>>()
                .into_iter()
                .flatten()
                .collect()
        } else {
            tasks.par_iter().map(compute).collect()
        }
    });

    let aggregates: Vec<Aggregate> = config
        .ns
        .iter()
        .map(|&n| {
            let group: Vec<&Row> = rows.iter().filter(|r| r.n == n).collect();
            let good: Vec<f64> = group.iter().filter(|r| r.ok()).map(|r| r.error()).collect();
            let mean_error = if good.is_empty() {
                f64::NAN
            } else {
                good.iter().sum::<f64>() / good.len() as f64
            };
            Aggregate {
                n,
                mean_error,
                successes: good.len(),
                excluded: group.len() - good.len(),
                bound: bound_for(config, &h, n, &group),
            }
        })
        .collect();

    let rate_fit = if aggregates.len() >= 3 {
        let errs: Vec<f64> = aggregates.iter().map(|a| a.mean_error).collect();
        fit_rate(&config.ns, &errs).ok()
    } else {
        None
    };

    Ok(ExperimentReport {
        kind: config.kind,
        rows,
        aggregates,
        rate_fit,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config_hash(config)?,
        input_hash: content_hash(&serde_json::to_vec(config)?),
    })
}

/// Parse a config file, run it and write the outputs. `input_hash` in the
/// manifest is the content hash of the file as read.
pub fn run_config_file(file: &Path, jobs: Option<usize>, outputs: Option<&Path>) -> Result<(ExperimentConfig, ExperimentReport)> {
    let bytes = std::fs::read(file).map_err(|e| Error::config("$", format!("cannot read {}: {e}", file.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| Error::config("$", e.to_string()))?;
    let mut config = ExperimentConfig::from_json(&text)?;
    if let Some(dir) = outputs {
        config.outputs = dir.to_path_buf();
    }
    let mut report = run_experiment(&config, jobs)?;
    report.input_hash = content_hash(&bytes);
    report.write(&config, &config.outputs)?;
    Ok((config, report))
}
