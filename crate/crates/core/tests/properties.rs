use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use sbp::bp_field::BpKernel;
use sbp::grid::{make_grid, Grid, ScalarField};
use sbp::model::Nonlinearity;
use sbp::nehari::sign_split;

fn grid() -> &'static Arc<Grid> {
    static GRID: OnceLock<Arc<Grid>> = OnceLock::new();
    GRID.get_or_init(|| make_grid(4.0, 8).unwrap())
}

fn kernel() -> &'static BpKernel {
    static KERNEL: OnceLock<BpKernel> = OnceLock::new();
    KERNEL.get_or_init(|| BpKernel::new(grid(), 1.0).unwrap())
}

fn field() -> impl Strategy<Value = ScalarField> {
    prop::collection::vec(-2.0f64..2.0, 512).prop_map(|v| ScalarField::from_values(grid(), v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn phi_is_nonnegative_and_quadratic(u in field(), t in 0.1f64..4.0) {
        let phi = kernel().solve_phi(&u).unwrap();
        prop_assert!(phi.min() >= -1e-14 * phi.max().max(1e-300));
        let scaled = kernel().solve_phi(&u.scaled(t)).unwrap();
        for (a, b) in scaled.values().iter().zip(phi.values()) {
            prop_assert!((a - t * t * b).abs() <= 1e-12 * (t * t * b).abs().max(1e-300) + 1e-14 * t * t * phi.max());
        }
    }

    #[test]
    fn coupling_is_symmetric(u in field(), v in field()) {
        let uv = kernel().bilinear_coupling(&u, &v).unwrap();
        let vu = kernel().bilinear_coupling(&v, &u).unwrap();
        prop_assert!((uv - vu).abs() <= 1e-10 * uv.abs().max(vu.abs()));
    }

    #[test]
    fn sign_split_reconstructs(u in field()) {
        let (plus, minus) = sign_split(&u);
        for ((w, p), m) in u.values().iter().zip(plus.values()).zip(minus.values()) {
            prop_assert_eq!(p + m, *w);
            prop_assert_eq!(p * m, 0.0);
        }
    }

    #[test]
    fn power_identity(p in 4.01f64..5.99, t in -50.0f64..50.0) {
        let f = Nonlinearity::power(p).unwrap();
        prop_assert!((f.f(t) * t - p * f.big_f(t)).abs() <= 1e-12 * (f.f(t) * t).abs().max(1e-300));
    }

    #[test]
    fn logpower_is_nonnegative_and_odd(t in 1e-6f64..1e3) {
        let f = Nonlinearity::log_power();
        prop_assert!(f.big_f(t) >= 0.0);
        prop_assert_eq!(f.f(-t), -f.f(t));
    }
}
