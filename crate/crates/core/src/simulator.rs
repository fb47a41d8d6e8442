//! Sample paths `Y(k/N) = X(k/N, H(k/N))` from one shared noise realization.
//!
//! The moving-average integral is replaced by a left-endpoint Riemann sum over
//! cells of width `Δ = 1/(N·substeps)` covering `[-T, 1]`. With `G(q) = (qΔ)^κ`
//! for `q ≥ 1` and `G(0) = 0`, the value at `t_k = k·substeps·Δ` is
//!
//! ```text
//! X(t_k, v) = A_k(v) - A_0(v),   A_k(v) = Σ_j G(k·substeps - j) z_j,
//! ```
//!
//! a single linear convolution per `v`, evaluated with FFTs. When `H` varies,
//! `A_k(v)` is computed at Chebyshev-Lobatto nodes in `[h_min, h_max]` and
//! interpolated; each node costs one convolution and the interpolant is
//! analytic in `v`, so a handful of nodes reaches round-off.

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hurst::HurstSpec;
use crate::kernel::{check_hurst_arg, positive_part_pow, PhiKernel};
use crate::quadrature::integrate;
use crate::stable::{check_alpha, noise_grid, StableNoiseGrid};
use crate::variations::filter_coeffs;

/// Smallest left truncation ever used.
pub const MIN_TRUNC: f64 = 1.0;
const INTERP_TARGET: f64 = 1e-13;
const MIN_NODES: usize = 4;
const MAX_NODES: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub alpha: f64,
    /// Path resolution: the path holds `Y(k/n)`, `k = 0..=n`.
    pub n: usize,
    /// Noise cells per step `1/n`.
    pub substeps: usize,
    /// Left truncation `T`; derived from `tail_tol` when absent.
    #[serde(default)]
    pub trunc_t: Option<f64>,
    /// Admissible ratio of the truncated kernel tail to the full kernel norm.
    #[serde(default = "default_tail_tol")]
    pub tail_tol: f64,
}

fn default_tail_tol() -> f64 {
    1e-3
}

impl SimConfig {
    pub fn new(alpha: f64, n: usize, substeps: usize) -> Result<Self> {
        let cfg = Self {
            alpha,
            n,
            substeps,
            trunc_t: None,
            tail_tol: default_tail_tol(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_trunc(mut self, trunc_t: f64) -> Result<Self> {
        self.trunc_t = Some(trunc_t);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if self.n == 0 {
            return Err(Error::domain("n", "path resolution must be >= 1"));
        }
        if self.substeps == 0 {
            return Err(Error::domain("substeps", "must be >= 1"));
        }
        if let Some(t) = self.trunc_t {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::domain("trunc_t", format!("must be positive and finite, got {t}")));
            }
        }
        if !(self.tail_tol > 0.0 && self.tail_tol < 1.0) {
            return Err(Error::domain("tail_tol", format!("must lie in (0, 1), got {}", self.tail_tol)));
        }
        Ok(())
    }

    /// Noise cell width `1/(n·substeps)`.
    pub fn mesh(&self) -> f64 {
        1.0 / (self.n * self.substeps) as f64
    }

    /// The truncation `T` in effect for the Hurst range of `h`.
    ///
    /// Without an explicit value, `T` is the smallest value (at least
    /// [`MIN_TRUNC`]) for which the part of the filtered kernel lying left of
    /// `-T`, measured in L^α norm, is at most `tail_tol` times the full norm
    /// at every resolution step `k ≥ 0`. The bound uses the analytic envelope
    /// `|κ(κ-1)…(κ-L+1)| |u|^{κ-L}` at the coarsest filter `L = 2` and both
    /// ends of the Hurst range.
    pub fn resolve_trunc(&self, h: &HurstSpec) -> Result<f64> {
        self.validate()?;
        if let Some(t) = self.trunc_t {
            return Ok(t);
        }
        let order = 2;
        let kernel = PhiKernel::new(self.alpha, order)?;
        let mut t: f64 = MIN_TRUNC;
        for v in [h.h_min, h.h_max] {
            check_hurst_arg(v, self.alpha)?;
            let kappa = v - 1.0 / self.alpha;
            let norm = kernel.norm(v, 1e-8, 1e12)?;
            let c = kernel.tail_envelope(-1.0, kappa);
            let decay = self.alpha * (order as f64 - kappa) - 1.0;
            // c^α X^{-decay} / decay <= (tail_tol · norm)^α
            let x = (c.powf(self.alpha) / (decay * (self.tail_tol * norm).powf(self.alpha))).powf(1.0 / decay);
            t = t.max(x / self.n as f64);
        }
        Ok(t)
    }
}

/// Simulation provenance attached to a path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub hurst_id: String,
    pub hurst: HurstSpec,
    pub sim: SimConfig,
    pub mesh: f64,
    pub trunc_t: f64,
    pub seed: u64,
    pub interp_nodes: usize,
}

/// Observed values `Y(k/N)`, `k = 0..=N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    pub n: usize,
    pub values: Vec<f64>,
    pub provenance: Option<Provenance>,
}

impl SamplePath {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::domain("path", "needs at least two samples"));
        }
        if values.iter().any(|y| !y.is_finite()) {
            return Err(Error::domain("path", "contains non-finite values"));
        }
        Ok(Self {
            n: values.len() - 1,
            values,
            provenance: None,
        })
    }

    /// Abscissa of sample `k`.
    pub fn t(&self, k: usize) -> f64 {
        k as f64 / self.n as f64
    }

    /// The same path observed at half the resolution (every second sample).
    pub fn coarsen(&self) -> Result<Self> {
        if self.n % 2 != 0 {
            return Err(Error::Precondition(format!("resolution {} is odd", self.n)));
        }
        Ok(Self {
            n: self.n / 2,
            values: self.values.iter().step_by(2).copied().collect(),
            provenance: self.provenance.clone(),
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            values: self.values.iter().map(|y| factor * y).collect(),
            provenance: self.provenance.clone(),
        }
    }
}

/// The noise grid used by [`simulate_path`]: cells of width `cfg.mesh()`
/// covering `[-T, 1]`, keyed by absolute cell index.
pub fn sim_noise(cfg: &SimConfig, trunc_t: f64, seed: u64) -> Result<StableNoiseGrid> {
    cfg.validate()?;
    let steps = cfg
        .n
        .checked_mul(cfg.substeps)
        .ok_or_else(|| Error::Size("n * substeps overflows".into()))?;
    let past = (trunc_t * steps as f64 - 1e-9).ceil();
    if !(past >= 1.0) || past > (1u64 << 40) as f64 {
        return Err(Error::Size(format!("truncation {trunc_t} needs {past} cells")));
    }
    let past = past as usize;
    let mesh = cfg.mesh();
    noise_grid(cfg.alpha, mesh, -(past as f64) * mesh, past + steps, seed)
}

/// `X(u, v)` by direct Riemann summation over every cell of `noise`.
///
/// The reference implementation for [`FieldEngine`]; cost is linear in the
/// number of cells per call.
pub fn field_at(noise: &StableNoiseGrid, u: f64, v: f64, cfg: &SimConfig) -> Result<f64> {
    check_hurst_arg(v, cfg.alpha)?;
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::domain("u", format!("must lie in [0, 1], got {u}")));
    }
    let trunc = cfg.trunc_t.unwrap_or(MIN_TRUNC);
    check_coverage(noise, trunc, u)?;
    let kappa = v - 1.0 / cfg.alpha;
    let mut acc = 0.0;
    for (j, z) in noise.increments.iter().enumerate() {
        let s = noise.left(j);
        if s >= u {
            break;
        }
        acc += (positive_part_pow(u - s, kappa) - positive_part_pow(-s, kappa)) * z;
    }
    Ok(acc)
}

fn check_coverage(noise: &StableNoiseGrid, trunc: f64, hi: f64) -> Result<()> {
    let slack = 1e-9 * noise.mesh;
    if noise.start() > -trunc + slack || noise.end() < hi - slack {
        return Err(Error::Coverage {
            need_lo: -trunc,
            need_hi: hi,
            have_lo: noise.start(),
            have_hi: noise.end(),
        });
    }
    Ok(())
}

/// Chebyshev-Lobatto nodes on `[lo, hi]`, or the single point when `lo == hi`.
fn lobatto_nodes(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 || lo == hi {
        return vec![lo];
    }
    let (c, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    (0..count)
        .map(|i| c + r * (std::f64::consts::PI * i as f64 / (count - 1) as f64).cos())
        .collect()
}

/// Barycentric weights at `x` for Lobatto nodes; exact node hits return a unit vector.
fn barycentric(nodes: &[f64], x: f64) -> Vec<f64> {
    let n = nodes.len();
    if n == 1 {
        return vec![1.0];
    }
    if let Some(i) = nodes.iter().position(|&v| v == x) {
        let mut w = vec![0.0; n];
        w[i] = 1.0;
        return w;
    }
    let raw: Vec<f64> = (0..n)
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let half = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            sign * half / (x - nodes[i])
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Number of interpolation nodes for a Hurst range of half-width `r` when
/// the largest |log| abscissa in the convolution is `a`.
fn node_count(r: f64, a: f64) -> usize {
    if r == 0.0 {
        return 1;
    }
    // (r a)^n / (2^{n-1} n!) bounds the relative interpolation error.
    let mut bound = 2.0;
    for n in 1..=MAX_NODES {
        bound *= r * a / (2.0 * n as f64);
        if n >= MIN_NODES && bound < INTERP_TARGET {
            return n;
        }
    }
    MAX_NODES
}

/// Values `X(k/N, v)` for every `k` at each interpolation node `v`.
#[derive(Debug, Clone)]
pub struct FieldEngine {
    pub cfg: SimConfig,
    pub trunc_t: f64,
    nodes: Vec<f64>,
    // node_values[i][k] = X(k/N, nodes[i])
    node_values: Vec<Vec<f64>>,
}

impl FieldEngine {
    /// Evaluate the field on the grid `k/N` for `v` across `[h_min, h_max]`.
    pub fn new(noise: &StableNoiseGrid, h_min: f64, h_max: f64, cfg: &SimConfig, trunc_t: f64) -> Result<Self> {
        cfg.validate()?;
        check_hurst_arg(h_min, cfg.alpha)?;
        check_hurst_arg(h_max, cfg.alpha)?;
        if h_min > h_max {
            return Err(Error::domain("h_min", "must not exceed h_max"));
        }
        let m = cfg.substeps;
        let steps = cfg.n * m;
        if (noise.mesh - cfg.mesh()).abs() > 1e-12 * cfg.mesh() || noise.alpha != cfg.alpha {
            return Err(Error::Precondition(format!(
                "noise mesh {} and alpha {} do not match the configuration ({}, {})",
                noise.mesh,
                noise.alpha,
                cfg.mesh(),
                cfg.alpha
            )));
        }
        check_coverage(noise, trunc_t, 1.0)?;
        // cells with absolute index in [-past, steps)
        let past = (-noise.first_cell) as usize;
        let z = &noise.increments[..past + steps];
        let span = past + steps;
        let mesh = cfg.mesh();

        let a = mesh.ln().abs().max((span as f64 * mesh).ln().abs()) + 1.0;
        let count = node_count(0.5 * (h_max - h_min), a);
        let nodes = lobatto_nodes(h_min, h_max, count);

        let fft_len = (2 * span + 1).next_power_of_two();
        let mut planner = FftPlanner::<f64>::new();
        let forward = planner.plan_fft_forward(fft_len);
        let inverse = planner.plan_fft_inverse(fft_len);

        let mut z_hat: Vec<Complex<f64>> = z.iter().map(|&x| Complex::new(x, 0.0)).collect();
        z_hat.resize(fft_len, Complex::new(0.0, 0.0));
        forward.process(&mut z_hat);

        let alpha = cfg.alpha;
        let kernel_row = |v: f64| -> Vec<f64> {
            let kappa = v - 1.0 / alpha;
            (0..=span)
                .map(|q| if q == 0 { 0.0 } else { (q as f64 * mesh).powf(kappa) })
                .collect()
        };
        let sample = |conv: &[f64]| -> Vec<f64> {
            let base = conv[past];
            (0..=cfg.n)
                .map(|k| if k == 0 { 0.0 } else { conv[k * m + past] - base })
                .collect()
        };

        let scale = 1.0 / fft_len as f64;
        let mut node_values = Vec::with_capacity(nodes.len());
        // Two real kernels per complex transform: z is real, so the real and
        // imaginary parts of the product separate the two convolutions.
        for pair in nodes.chunks(2) {
            let rows: Vec<Vec<f64>> = pair.par_iter().map(|&v| kernel_row(v)).collect();
            let mut buf: Vec<Complex<f64>> = (0..fft_len)
                .map(|q| {
                    let re = rows[0].get(q).copied().unwrap_or(0.0);
                    let im = rows.get(1).and_then(|r| r.get(q)).copied().unwrap_or(0.0);
                    Complex::new(re, im)
                })
                .collect();
            forward.process(&mut buf);
            buf.iter_mut().zip(&z_hat).for_each(|(b, zh)| *b *= zh);
            inverse.process(&mut buf);
            let re: Vec<f64> = buf.iter().map(|c| c.re * scale).collect();
            node_values.push(sample(&re));
            if pair.len() == 2 {
                let im: Vec<f64> = buf.iter().map(|c| c.im * scale).collect();
                node_values.push(sample(&im));
            }
        }

        Ok(Self {
            cfg: *cfg,
            trunc_t,
            nodes,
            node_values,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// `X(k/N, v)` for `v` in the engine's Hurst range.
    pub fn value(&self, k: usize, v: f64) -> f64 {
        let w = barycentric(&self.nodes, v);
        w.iter().zip(&self.node_values).map(|(w, row)| w * row[k]).sum()
    }

    /// `Y(k/N) = X(k/N, H(k/N))` for `k = 0..=N`.
    pub fn path_values(&self, h: &HurstSpec) -> Vec<f64> {
        let nf = self.cfg.n as f64;
        let mut out: Vec<f64> = (0..=self.cfg.n).map(|k| self.value(k, h.eval(k as f64 / nf))).collect();
        out[0] = 0.0;
        out
    }

    /// `d̃_{N,k} = Σ_l a_l X((k+l)/N, H(k/N))` for `k = 0..=N-L`.
    pub fn frozen_variations(&self, h: &HurstSpec, order: usize) -> Result<Vec<f64>> {
        let coeffs: Vec<f64> = filter_coeffs(order)?.into_iter().map(|a| a as f64).collect();
        let n = self.cfg.n;
        if n < order {
            return Err(Error::domain("n", format!("resolution {n} is below the filter order {order}")));
        }
        // filtered rows per node, then interpolate in v
        let filtered: Vec<Vec<f64>> = self
            .node_values
            .iter()
            .map(|row| {
                row.windows(order + 1)
                    .map(|w| w.iter().zip(&coeffs).map(|(y, a)| a * y).sum())
                    .collect()
            })
            .collect();
        let nf = n as f64;
        Ok((0..=n - order)
            .map(|k| {
                let w = barycentric(&self.nodes, h.eval(k as f64 / nf));
                w.iter().zip(&filtered).map(|(w, row)| w * row[k]).sum()
            })
            .collect())
    }
}

/// Simulate `Y(k/N)` for `k = 0..=N` from the noise realization keyed by `seed`.
pub fn simulate_path(h: &HurstSpec, cfg: &SimConfig, seed: u64) -> Result<SamplePath> {
    h.validate_for(cfg.alpha)?;
    let trunc = cfg.resolve_trunc(h)?;
    let noise = sim_noise(cfg, trunc, seed)?;
    simulate_with_noise(&noise, h, cfg, trunc)
}

/// Simulate from a caller-supplied noise grid on the configuration's mesh.
pub fn simulate_with_noise(noise: &StableNoiseGrid, h: &HurstSpec, cfg: &SimConfig, trunc_t: f64) -> Result<SamplePath> {
    let engine = FieldEngine::new(noise, h.h_min, h.h_max, cfg, trunc_t)?;
    let values = engine.path_values(h);
    if values.iter().any(|y| !y.is_finite()) {
        return Err(Error::Size("simulation produced non-finite values".into()));
    }
    Ok(SamplePath {
        n: cfg.n,
        values,
        provenance: Some(Provenance {
            hurst_id: h.id(),
            hurst: h.clone(),
            sim: *cfg,
            mesh: cfg.mesh(),
            trunc_t,
            seed: noise.seed,
            interp_nodes: engine.node_count(),
        }),
    })
}

/// Frozen variations `d̃_{N,k}` driven by `noise`, at resolution `n` and filter order `order`.
pub fn frozen_variation_inputs(
    noise: &StableNoiseGrid,
    h: &HurstSpec,
    n: usize,
    order: usize,
    cfg: &SimConfig,
) -> Result<Vec<f64>> {
    let cfg = SimConfig { n, ..*cfg };
    let trunc = cfg.trunc_t.unwrap_or(MIN_TRUNC);
    FieldEngine::new(noise, h.h_min, h.h_max, &cfg, trunc)?.frozen_variations(h, order)
}

/// α-scale of the discretized frozen variation `d̃_{N,k}`.
///
/// `d̃_{N,k} = Σ_j c_j z_j` with `c_j = N^{-κ} Φ_α(j/substeps - k, H(k/N))`
/// over the cells `j` of the Riemann sum, and each `z_j` has scale `Δ^{1/α}`,
/// so the scale is `(Δ Σ_j |c_j|^α)^{1/α}`.
pub fn discrete_variation_scale(k: usize, h: &HurstSpec, order: usize, cfg: &SimConfig, trunc_t: f64) -> Result<f64> {
    cfg.validate()?;
    let n = cfg.n;
    if k + order > n {
        return Err(Error::domain("k", format!("index {k} exceeds N - L = {}", n as i64 - order as i64)));
    }
    let v = h.eval(k as f64 / n as f64);
    check_hurst_arg(v, cfg.alpha)?;
    let kappa = v - 1.0 / cfg.alpha;
    let kernel = PhiKernel::new(cfg.alpha, order)?;
    let m = cfg.substeps as i64;
    let past = (trunc_t * (n * cfg.substeps) as f64 - 1e-9).ceil() as i64;
    let hi = (k + order) as i64 * m;
    let mf = m as f64;
    let sum: f64 = (-past..hi)
        .into_par_iter()
        .map(|j| kernel.eval_kappa(j as f64 / mf - k as f64, kappa).abs().powf(cfg.alpha))
        .sum();
    let nf = n as f64;
    Ok(nf.powf(-kappa) * (cfg.mesh() * sum).powf(1.0 / cfg.alpha))
}

/// `N^{-H(k/N)} ‖Φ_α(·, H(k/N))‖_{L^α}`, the exact scale of `d̃_{N,k}`.
pub fn exact_variation_scale(k: usize, n: usize, h: &HurstSpec, order: usize, alpha: f64) -> Result<f64> {
    let v = h.eval(k as f64 / n as f64);
    let kernel = PhiKernel::new(alpha, order)?;
    Ok((n as f64).powf(-v) * kernel.norm(v, 1e-10, 1e12)?)
}

/// L^α norm of `s ↦ (t-s)_+^κ - (-s)_+^κ` over `s < -trunc`, relative to the
/// norm over all of ℝ. Used to report how much of the path itself (rather
/// than its filtered variations) the truncation discards.
pub fn path_tail_ratio(t: f64, v: f64, alpha: f64, trunc: f64) -> Result<f64> {
    check_hurst_arg(v, alpha)?;
    let kappa = v - 1.0 / alpha;
    // (t + w)^κ - w^κ = w^κ expm1(κ ln1p(t/w)) for w = -s > 0, free of cancellation
    let f = |s: f64| {
        if s < 0.0 {
            let w = -s;
            (w.powf(kappa) * (kappa * (t / w).ln_1p()).exp_m1()).abs().powf(alpha)
        } else {
            positive_part_pow(t - s, kappa).powf(alpha)
        }
    };
    // s = -e^x on the far side
    let g = |x: f64| {
        let w = x.exp();
        f(-w) * w
    };
    let near = integrate(f, &[-1.0, 0.0, t], 1e-13, 1e-10, 20_000)?.value;
    let cut = trunc.ln().max(0.0);
    let mid = integrate(g, &[0.0, cut], 1e-13, 1e-10, 20_000)?.value;
    let far_breaks: Vec<f64> = (0..=30).map(|i| cut + 5.0 * i as f64).collect();
    let far = integrate(g, &far_breaks, 1e-16, 1e-10, 20_000)?.value;
    Ok((far / (near + mid + far)).powf(1.0 / alpha))
}
