//! Ground-state level `c₀` for the baseline model on an `N = 32` box.
//!
//!     cargo run --release --example ground_state [N] [L] [spectral|second_order]

use sbp::grid::{make_grid_with, Stencil};
use sbp::minimize::{solve_ground, SolveOptions};
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
    let report = solve_ground(&model, &grid, &SolveOptions::default())?;
    println!("c0 ≈ {:.10}", report.level);
    println!("iterations  {}", report.iterations);
    println!("residual    {:.3e}", report.residual);
    println!("t_u         {:?}", report.projection);
    println!("energy      {:?}", report.energy);
    println!("sign range  [{:.3e}, {:.3e}]", report.sign.min, report.sign.max);
    Ok(())
}
