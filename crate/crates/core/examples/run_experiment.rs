//! Run a small convergence experiment from an in-memory config and write
//! its CSV files and manifest.
//!
//! Usage: cargo run --release --example run_experiment [out_dir]

use lmsm::harness::{run_experiment, ExperimentConfig};

const CONFIG: &str = r#"{
  "kind": "local-interval",
  "model": { "alpha": 1.5, "hurst": { "family": "constant", "h": 0.7 } },
  "sim": { "substeps": 8 },
  "estimator": { "beta": 0.25, "filter_order": 5, "regime": "relaxed" },
  "ns": [1024, 4096],
  "replicates": 4,
  "master_seed": 2024,
  "outputs": "experiment-out",
  "interval": { "lo": 0.0, "hi": 1.0 }
}"#;

fn main() -> lmsm::Result<()> {
    let mut config = ExperimentConfig::from_json(CONFIG)?;
    if let Some(dir) = std::env::args().nth(1) {
        config.outputs = dir.into();
    }
    let report = run_experiment(&config, None)?;
    for a in &report.aggregates {
        println!("N = {:<6} mean error {:.4}  ({} ok, {} excluded)", a.n, a.mean_error, a.successes, a.excluded);
    }
    report.write(&config, &config.outputs)?;
    println!("wrote {}", config.outputs.display());
    Ok(())
}
