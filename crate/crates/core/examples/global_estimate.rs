//! Estimate the whole Hurst function with the windowed estimator.

use lmsm::estimator::theta_schedule;
use lmsm::metrics::uniform_error;
use lmsm::{estimate_h_function, simulate_path, EstimatorConfig, HurstSpec, SimConfig};

fn main() -> lmsm::Result<()> {
    let h = HurstSpec::sinusoidal(0.8, 0.1, 1.0)?;
    let n = 1 << 14;
    let path = simulate_path(&h, &SimConfig::new(1.5, 2 * n, 8)?, 5)?;
    let cfg = EstimatorConfig::new(0.25, 2)?;
    let theta = theta_schedule(n, &cfg, Some(h.rho_h))?;
    let est = estimate_h_function(&path, &cfg, theta)?;

    println!("theta = {theta:.4}, {} windows", est.knots_t.len() - 1);
    println!("t       H(t)    estimate");
    for i in 0..=10 {
        let t = i as f64 / 10.0;
        println!("{t:<7.2} {:.4}  {:.4}", h.eval(t), est.eval(t)?);
    }
    println!("sup error {:.4}", uniform_error(&est, &h, 2001)?);
    Ok(())
}
