//! Estimate min H over subintervals from a single simulated path.

use lmsm::metrics::interval_min_h;
use lmsm::{estimate_hmin, simulate_path, EstimatorConfig, HurstSpec, IntervalSpec, SimConfig};

fn main() -> lmsm::Result<()> {
    let h = HurstSpec::affine(0.6, 0.2)?;
    let n = 1 << 14;
    // The estimator uses the path at N and at 2N, so simulate 2N steps.
    let path = simulate_path(&h, &SimConfig::new(1.8, 2 * n, 16)?, 11)?;
    let cfg = EstimatorConfig::new(0.25, 5)?.relaxed();

    println!("interval      true min  estimate");
    for (lo, hi) in [(0.0, 1.0), (0.2, 0.8), (0.5, 1.0), (0.75, 1.0)] {
        let iv = IntervalSpec::new(lo, hi)?;
        let est = estimate_hmin(&path, &iv, &cfg)?;
        println!("[{lo:.2}, {hi:.2}]  {:.4}    {est:.4}", interval_min_h(&h, &iv, 2001)?);
    }
    Ok(())
}
