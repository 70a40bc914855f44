//! Truncated Maxwell and Bopp–Podolsky point-charge energies as the inner
//! radius shrinks. The Maxwell column blows up like 2π/ε; the BP column
//! settles.
//!
//!     cargo run --release --example kernel_energies [a]

use sbp::bp_field::kernel_energies;

fn main() -> sbp::Result<()> {
    let a: f64 = std::env::args().nth(1).map_or(1.0, |s| s.parse().expect("a"));
    let r_max = 100.0;
    println!("{:>10} {:>14} {:>14} {:>12}", "epsilon", "maxwell", "bp", "bp change");
    let mut prev: Option<f64> = None;
    let mut eps = 0.1;
    while eps > 5e-5 {
        let e = kernel_energies(a, eps, r_max)?;
        let change = prev.map_or(String::from("-"), |p| format!("{:.3e}", e.bp_truncated - p));
        println!(
            "{:>10.3e} {:>14.6e} {:>14.10} {:>12}",
            eps, e.maxwell_truncated, e.bp_truncated, change
        );
        prev = Some(e.bp_truncated);
        eps *= 0.5;
    }
    Ok(())
}
