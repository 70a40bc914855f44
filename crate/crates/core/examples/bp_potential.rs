//! Bopp–Podolsky potential of a Gaussian density: value at the centre, the
//! bound `φ(0) <= ‖u‖₂² / a`, and the radial profile against `‖u‖₂²/r`.
//!
//!     cargo run --release --example bp_potential [a] [N]

use sbp::bp_field::{coupling, BpKernel};
use sbp::grid::{l2_norm, make_grid, ScalarField};

fn main() -> sbp::Result<()> {
    let mut args = std::env::args().skip(1);
    let a: f64 = args.next().map_or(1.0, |s| s.parse().expect("a"));
    let n: usize = args.next().map_or(32, |s| s.parse().expect("N"));
    let grid = make_grid(8.0, n)?;
    let u = ScalarField::from_fn(&grid, |x, y, z| (-(x * x + y * y + z * z)).exp());
    let kernel = BpKernel::new(&grid, a)?;
    let phi = kernel.solve_phi(&u)?;
    let mass = l2_norm(&u).powi(2);

    println!("‖u‖₂² = {mass:.6}, max φ = {:.6}, ‖u‖₂²/a = {:.6}", phi.max(), mass / a);
    println!("∫φu² = {:.6}, ‖u‖₂⁴/a = {:.6}", coupling(&u, &phi)?, mass * mass / a);
    println!("{:>8} {:>12} {:>12}", "r", "φ", "‖u‖₂²/r");
    let mid = n / 2;
    for i in mid..n {
        let idx = grid.index(i, mid, mid);
        let r = grid.position(idx).iter().map(|c| c * c).sum::<f64>().sqrt();
        println!("{:>8.3} {:>12.6} {:>12.6}", r, phi.values()[idx], mass / r);
    }
    Ok(())
}
