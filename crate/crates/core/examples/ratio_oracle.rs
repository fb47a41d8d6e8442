//! Compare the exact variation ratio with 2^{βH} and invert it back to H.

use lmsm::estimator::hurst_from_ratio;
use lmsm::variations::expected_v_tilde;
use lmsm::{HurstSpec, IntervalSpec, KernelConfig, PhiNormCache};

fn main() -> lmsm::Result<()> {
    let beta = 0.25;
    let norms = PhiNormCache::new(KernelConfig::new(1.5, 3)?)?;
    let iv = IntervalSpec::unit();
    println!("H      ratio          2^(beta H)     recovered H");
    for h0 in [0.7, 0.8, 0.9] {
        let h = HurstSpec::constant(h0)?;
        let coarse = expected_v_tilde(&h, &iv, 1024, beta, &norms)?;
        let fine = expected_v_tilde(&h, &iv, 2048, beta, &norms)?;
        let ratio = coarse / fine;
        println!("{h0:<6} {ratio:.12}  {:.12}  {:.12}", 2f64.powf(beta * h0), hurst_from_ratio(ratio, beta));
    }
    Ok(())
}
