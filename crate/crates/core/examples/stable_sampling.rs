//! Draw symmetric α-stable variates and compare their empirical
//! characteristic function and absolute moments with the closed forms.

use lmsm::rng::seeded;
use lmsm::{moment_constant, sample_sas, StableParams};

fn main() -> lmsm::Result<()> {
    let alpha = 1.5;
    let params = StableParams::standard(alpha)?;
    let mut rng = seeded(7);
    let n = 200_000;
    let xs: Vec<f64> = (0..n).map(|_| sample_sas(&params, &mut rng)).collect::<lmsm::Result<_>>()?;

    println!("xi    ecf        exp(-xi^alpha)");
    for xi in [0.5, 1.0, 2.0] {
        let ecf = xs.iter().map(|x| (xi * x).cos()).sum::<f64>() / n as f64;
        println!("{xi:<5} {ecf:.6}   {:.6}", (-f64::powf(xi, alpha)).exp());
    }

    println!("\np     mean |X|^p   c(p)");
    for p in [0.25, 0.5, 1.0] {
        let m = xs.iter().map(|x| x.abs().powf(p)).sum::<f64>() / n as f64;
        println!("{p:<5} {m:.6}     {:.6}", moment_constant(p, alpha)?);
    }
    Ok(())
}
