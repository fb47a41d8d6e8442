//! Simulate a multifractional path with a sinusoidal Hurst function and show
//! how the local roughness follows H(t).

use lmsm::variations::variations_d;
use lmsm::{simulate_path, HurstSpec, SimConfig};

fn main() -> lmsm::Result<()> {
    let h = HurstSpec::sinusoidal(0.75, 0.1, 1.0)?;
    let cfg = SimConfig::new(1.6, 8192, 16)?;
    let path = simulate_path(&h, &cfg, 1)?;
    let prov = path.provenance.as_ref().expect("simulated paths carry provenance");
    println!("{}: trunc_T = {}, interpolation nodes = {}", prov.hurst_id, prov.trunc_t, prov.interp_nodes);

    // Mean |second difference| per eighth of [0, 1]; smaller H means rougher.
    let d = variations_d(&path.values, 2)?;
    let chunk = d.len() / 8;
    println!("t_mid   H(t_mid)  mean |d|");
    for (i, block) in d.chunks(chunk).take(8).enumerate() {
        let mid = (i as f64 + 0.5) / 8.0;
        let m = block.iter().map(|x| x.abs()).sum::<f64>() / block.len() as f64;
        println!("{mid:<7} {:.4}    {m:.3e}", h.eval(mid));
    }
    Ok(())
}
