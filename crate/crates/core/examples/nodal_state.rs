//! Least-energy sign-changing solution from a dipole start, compared with
//! the ground state on the same box.
//!
//!     cargo run --release --example nodal_state [N] [L] [spectral|second_order]

use sbp::grid::{make_grid_with, Stencil};
use sbp::minimize::{solve_ground, solve_nodal, Initializer, SolveOptions};
use sbp::model::ModelParams;

fn main() -> sbp::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(32, |s| s.parse().expect("N"));
    let l: f64 = args.next().map_or(8.0, |s| s.parse().expect("L"));
    let stencil = match args.next().as_deref() {
        Some("spectral") => Stencil::Spectral,
        _ => Stencil::SecondOrder,
    };
    let grid = make_grid_with(l, n, stencil)?;
    let model = ModelParams::baseline();
    let ground = solve_ground(&model, &grid, &SolveOptions::default())?;
    let opts = SolveOptions {
        initializer: Initializer::Dipole,
        ..SolveOptions::default()
    };
    let nodal = solve_nodal(&model, &grid, &opts)?;
    let (c0, c1) = (ground.level, nodal.level);
    println!("c0 = {c0:.10}  ({} iterations)", ground.iterations);
    println!("c1 = {c1:.10}  ({} iterations)", nodal.iterations);
    println!("c1 - c0 = {:.6}   c1 - 2 c0 = {:.6}", c1 - c0, c1 - 2.0 * c0);
    println!("residual {:.3e}", nodal.residual);
    println!("component norms     {:?}", nodal.component_norms);
    println!("component residuals {:?}", nodal.component_residuals);
    println!("sign range [{:.4}, {:.4}]", nodal.sign.min, nodal.sign.max);
    Ok(())
}
