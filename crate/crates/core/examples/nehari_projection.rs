//! Projects a Gaussian onto the Nehari manifold and an asymmetric dipole onto
//! the nodal set, then prints the fibering map around each maximum.
//!
//!     cargo run --release --example nehari_projection

use sbp::energy::Problem;
use sbp::grid::{make_grid, ScalarField};
use sbp::model::ModelParams;
use sbp::nehari::{sign_changes, Fiber, NodalSystem, DEFAULT_TOL};

fn main() -> sbp::Result<()> {
    let grid = make_grid(8.0, 24)?;
    let problem = Problem::new(&grid, ModelParams::baseline())?;

    let u = ScalarField::from_fn(&grid, |x, y, z| (-(x * x + y * y + z * z) / 3.0).exp());
    let fiber = Fiber::new(&problem, &u)?;
    let diag = fiber.project(DEFAULT_TOL)?;
    let t_u = diag.t_star;
    println!(
        "ground: t_u = {t_u:.10}, bracket {:?}, {} iterations",
        diag.bracket, diag.iterations
    );
    println!(
        "  sign changes of h' on [t_u/1e3, 1e3 t_u]: {}",
        sign_changes(&fiber.sign_pattern(t_u, 1e3, 400))
    );
    for k in -4..=4 {
        let t = t_u * 2f64.powf(k as f64 / 2.0);
        println!("  h({t:>9.5}) = {:>12.6}", fiber.h(t));
    }

    let w = ScalarField::from_fn(&grid, |x, y, z| {
        let r2 = y * y + z * z;
        (-((x - 2.0).powi(2) + r2) / 2.0).exp() - 0.6 * (-((x + 2.0).powi(2) + r2) / 1.5).exp()
    });
    let system = NodalSystem::new(&problem, &w)?;
    let root = system.solve(DEFAULT_TOL)?;
    println!(
        "nodal: (t, s) = ({:.10}, {:.10}), residual {:.1e}, Miranda box {:?}",
        root.t, root.s, root.residual, root.miranda_box
    );
    println!("  coefficients {:?}", system.coeffs);
    println!("  J at the projection {:.8}", system.energy(root.t, root.s));
    Ok(())
}
