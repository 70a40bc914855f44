//! Growth and monotonicity checks on three nonlinearities. `p = 3.5` is
//! below the quartic threshold and should fail.
//!
//!     cargo run --example hypotheses

use sbp::model::{check_hypotheses, log_samples, Nonlinearity};

fn main() -> sbp::Result<()> {
    let samples = log_samples(-6, 6, 20);
    for model in [
        Nonlinearity::power(5.0)?,
        Nonlinearity::log_power(),
        Nonlinearity::power(3.5)?,
    ] {
        let report = check_hypotheses(&model, &samples)?;
        println!("{model:?}");
        for c in &report.checks {
            let mark = if c.pass { "ok  " } else { "FAIL" };
            println!(
                "  {mark} {:<22} worst margin {:>11.3e}  {}",
                c.id, c.worst_margin, c.description
            );
        }
    }
    Ok(())
}
