//! Parses a TOML run configuration and shows the solver options it maps to.
//!
//!     cargo run --example cli_config [file.toml]

use sbp::config::parse_config;

const SAMPLE: &str = r#"
[grid]
L = 8.0
N = 32
stencil = "second_order"

[model]
a = 1.0
q = 1.0
nonlinearity = "logpower"

[solve]
seed = 7
max_iters = 3000
"#;

fn main() -> sbp::Result<()> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => SAMPLE.to_string(),
    };
    let config = parse_config(&text)?;
    println!("model   {:?}", config.model_params()?);
    println!(
        "grid    L = {}, N = {}, {:?}",
        config.grid.half_length, config.grid.points_per_axis, config.grid.stencil
    );
    println!("ground  {:?}", config.solve_options(false));
    println!("nodal   initializer {:?}", config.solve_options(true).initializer);

    match parse_config("[model]\nq = 0.0\n") {
        Err(e) => println!("q = 0 is rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
