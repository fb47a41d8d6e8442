//! Tabulate the filtered kernel Φ_α(·, v) and its L^α norm.

use lmsm::{KernelConfig, KernelNorms, PhiKernel, PhiNormCache};

fn main() -> lmsm::Result<()> {
    let alpha = 1.5;
    let order = 2;
    let kernel = PhiKernel::new(alpha, order)?;
    let v = 0.7;

    println!("u       Phi(u, {v})");
    for u in [-20.0, -5.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0] {
        println!("{u:<7} {:+.6e}", kernel.eval(u, v)?);
    }

    let norms = PhiNormCache::new(KernelConfig::new(alpha, order)?)?;
    println!("\nv      ||Phi(., v)||_alpha");
    for v in [0.67, 0.7, 0.75, 0.8, 0.9, 0.99] {
        println!("{v:<6} {:.8}", norms.norm(v)?);
    }
    Ok(())
}
