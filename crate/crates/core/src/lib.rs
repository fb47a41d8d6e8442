//! Simulation of linear multifractional stable motion (LMSM) and estimation
//! of its Hurst function from filtered discrete variations.
//!
//! The path `Y(t) = X(t, H(t))` is built from the moving-average stable field
//! `X(t, v) = ∫ ((t-s)_+^{v-1/α} - (-s)_+^{v-1/α}) Z_α(ds)` driven by one
//! symmetric α-stable random measure. The local estimator compares β-means of
//! order-L variations at resolutions N and 2N; the global estimator
//! interpolates local estimates over a shrinking partition of `[0, 1]`.

pub mod error;
pub mod estimator;
pub mod harness;
pub mod hurst;
pub mod io;
pub mod kernel;
pub mod metrics;
pub mod quadrature;
pub mod rng;
pub mod simulator;
pub mod stable;
pub mod variations;

pub use error::{Error, Result};
pub use estimator::{estimate_h_function, estimate_hmin, EstimatorConfig, HEstimate, Schedule};
pub use hurst::{HurstFamily, HurstSpec};
pub use kernel::{KernelConfig, KernelNorms, PhiKernel, PhiNormCache};
pub use simulator::{simulate_path, SamplePath, SimConfig};
pub use stable::{moment_constant, noise_grid, sample_sas, StableNoiseGrid, StableParams};
pub use variations::{IntervalSpec, VariationSet};
