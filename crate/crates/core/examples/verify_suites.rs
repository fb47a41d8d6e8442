//! Run every built-in verification suite.

use lmsm::harness::{verify, Suite};

fn main() {
    let mut failed = 0;
    for suite in Suite::ALL {
        let report = verify(suite);
        print!("{}", report.render());
        failed += report.checks.iter().filter(|c| !c.passed).count();
    }
    if failed > 0 {
        eprintln!("{failed} checks failed");
        std::process::exit(1);
    }
}
