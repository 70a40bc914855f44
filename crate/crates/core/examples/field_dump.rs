//! Solves a small ground state, writes it as a binary field dump, reads it
//! back and restarts the solver from the file.
//!
//!     cargo run --release --example field_dump [path]

use sbp::grid::{make_grid_with, Stencil};
use sbp::io::{read_field, write_field};
use sbp::minimize::{solve_ground, Initializer, SolveOptions};
use sbp::model::ModelParams;

fn main() -> sbp::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("ground.sbpf"), Into::into);
    let grid = make_grid_with(6.0, 16, Stencil::SecondOrder)?;
    let model = ModelParams::baseline();

    let first = solve_ground(&model, &grid, &SolveOptions::default())?;
    write_field(&path, first.field())?;
    let back = read_field(&path)?;
    println!("wrote {} ({} values)", path.display(), back.values().len());
    assert_eq!(back.values(), first.field().values());

    let opts = SolveOptions {
        initializer: Initializer::File(path.clone()),
        noise: 0.0,
        ..SolveOptions::default()
    };
    let again = solve_ground(&model, &grid, &opts)?;
    println!(
        "first solve:  c0 = {:.10} after {} iterations",
        first.level, first.iterations
    );
    println!(
        "from file:    c0 = {:.10} after {} iterations",
        again.level, again.iterations
    );
    Ok(())
}
