//! Simulate linear fractional stable motion (constant H) and write it as CSV.
//!
//! Usage: cargo run --release --example simulate_lfsm [out.csv]

use lmsm::io::write_path;
use lmsm::{simulate_path, HurstSpec, SimConfig};

fn main() -> lmsm::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "lfsm.csv".into());
    let h = HurstSpec::constant(0.7)?;
    let cfg = SimConfig::new(1.5, 4096, 16)?;
    let path = simulate_path(&h, &cfg, 42)?;

    let max = path.values.iter().fold(0.0_f64, |m, y| m.max(y.abs()));
    println!("N = {}, Y(1) = {:.6}, max |Y| = {max:.6}", path.n, path.values[path.n]);
    write_path(out.as_ref(), &path)?;
    println!("wrote {out} and its JSON sidecar");
    Ok(())
}
