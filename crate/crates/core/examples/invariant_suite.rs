//! Runs the invariant suite on random fields and prints one line per
//! invariant.
//!
//!     cargo run --release --example invariant_suite [trials] [seed] [spectral|second_order] [--solves]

use sbp::grid::{make_grid_with, Stencil};
use sbp::model::ModelParams;
use sbp::verify::{run_invariant_suite_with, SuiteOptions};

fn main() -> sbp::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let trials = args.first().map_or(20, |s| s.parse().expect("trials"));
    let seed = args.get(1).map_or(7, |s| s.parse().expect("seed"));
    let stencil = match args.get(2).map(String::as_str) {
        Some("spectral") => Stencil::Spectral,
        _ => Stencil::SecondOrder,
    };
    let grid = make_grid_with(8.0, 32, stencil)?;
    let mut opts = SuiteOptions::new(trials, seed);
    opts.include_solves = args.iter().any(|a| a == "--solves");
    let report = run_invariant_suite_with(&ModelParams::baseline(), &grid, &opts)?;
    for v in &report.verdicts {
        let value = v.max_violation.map_or("-".to_string(), |x| format!("{x:.3e}"));
        println!(
            "{:<6} {:<44} {:>11}  {:?}",
            if v.pass { "ok" } else { "FAIL" },
            v.invariant_id,
            value,
            v.mode
        );
    }
    println!(
        "rejections {}  sup-norm floor {:.6}",
        report.rejections, report.sup_norm_floor
    );
    println!("all pass: {}", report.all_pass);
    Ok(())
}
