//! Bopp–Podolsky potential `φ_u = K * u²` with `K(r) = (1 - e^{-r/a}) / r`.
//!
//! `φ_u` solves `-Δφ + a²Δ²φ = 4π u²` on the whole space. The convolution is a
//! free-space one: `u²` is zero-padded onto a `2N` grid and multiplied in
//! spectral space by the transform of the kernel sampled at node distances,
//! with `K(0) = 1/a`. The result is exactly the discrete sum
//! `φ(x) = Σ_y K(|x - y|) u(y)² h³`, up to transform round-off.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::Fft3;
use crate::grid::{Grid, ScalarField};
use crate::quadrature::integrate_log_panels;

/// Value of the Bopp–Podolsky kernel at distance `r`.
pub fn kernel_k(r: f64, a: f64) -> Result<f64> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Bopp-Podolsky parameter a must be positive, got {a}"
        )));
    }
    if !(r >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "distance must be nonnegative, got {r}"
        )));
    }
    Ok(kernel_value(r, a))
}

pub(crate) fn kernel_value(r: f64, a: f64) -> f64 {
    if r == 0.0 {
        1.0 / a
    } else {
        -(-r / a).exp_m1() / r
    }
}

/// Radial derivative `K'(r)`.
pub(crate) fn kernel_slope(r: f64, a: f64) -> f64 {
    let x = r / a;
    if x < 1e-3 {
        // K = 1/a - r/(2a²) + r²/(6a³) - r³/(24a⁴) + ...
        (-0.5 + x / 3.0 - x * x / 8.0 + x * x * x / 30.0) / (a * a)
    } else {
        ((-x).exp() * x + (-x).exp_m1()) / (r * r)
    }
}

/// `ΔK(r)` for `r > 0`. `1/r` is harmonic away from the origin and
/// `e^{-r/a}/r` is a Yukawa profile, so `ΔK = -e^{-r/a} / (a² r)`.
pub(crate) fn kernel_laplacian(r: f64, a: f64) -> f64 {
    -(-r / a).exp() / (a * a * r)
}

/// Coulomb kernel `1/r`, truncated below `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoulombKernel {
    epsilon: f64,
}

impl CoulombKernel {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "truncation radius must be positive, got {epsilon}"
            )));
        }
        Ok(Self { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn value(&self, r: f64) -> f64 {
        1.0 / r.max(self.epsilon)
    }
}

/// Sampled Bopp–Podolsky kernel and its transform on the doubled grid.
#[derive(Debug, Clone)]
pub struct BpKernel {
    a: f64,
    grid: Arc<Grid>,
    padded: Fft3,
    spectrum: Vec<Complex64>,
}

impl BpKernel {
    pub fn new(grid: &Arc<Grid>, a: f64) -> Result<Self> {
        kernel_k(0.0, a)?;
        let n = grid.points_per_axis();
        let m = 2 * n;
        let h = grid.spacing();
        let padded = Fft3::new(m);
        let fold = |i: usize| i.min(m - i) as f64;
        let mut spectrum = vec![Complex64::default(); padded.len()];
        for i0 in 0..m {
            for i1 in 0..m {
                for i2 in 0..m {
                    let (d0, d1, d2) = (fold(i0), fold(i1), fold(i2));
                    let r = h * (d0 * d0 + d1 * d1 + d2 * d2).sqrt();
                    spectrum[(i0 * m + i1) * m + i2] = Complex64::new(kernel_value(r, a), 0.0);
                }
            }
        }
        padded.forward(&mut spectrum);
        Ok(Self {
            a,
            grid: Arc::clone(grid),
            padded,
            spectrum,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    fn check(&self, u: &ScalarField) -> Result<()> {
        if **u.grid() == *self.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `φ_u = K * u²`.
    pub fn solve_phi(&self, u: &ScalarField) -> Result<ScalarField> {
        self.check(u)?;
        Ok(self.convolve_density(u.values().iter().map(|v| v * v)))
    }

    /// `K * ρ` for a density given node by node.
    pub(crate) fn convolve_density<I: Iterator<Item = f64>>(&self, density: I) -> ScalarField {
        let n = self.grid.points_per_axis();
        let m = 2 * n;
        let mut buf = vec![Complex64::default(); self.padded.len()];
        for (i, rho) in density.enumerate() {
            let [i0, i1, i2] = self.grid.split_index(i);
            buf[(i0 * m + i1) * m + i2] = Complex64::new(rho, 0.0);
        }
        self.padded.forward(&mut buf);
        for (b, k) in buf.iter_mut().zip(&self.spectrum) {
            *b *= k;
        }
        self.padded.inverse(&mut buf);
        let h3 = self.grid.cell_volume();
        let mut out = vec![0.0; self.grid.len()];
        for (i, o) in out.iter_mut().enumerate() {
            let [i0, i1, i2] = self.grid.split_index(i);
            *o = buf[(i0 * m + i1) * m + i2].re * h3;
        }
        ScalarField::from_raw(&self.grid, out)
    }

    /// `B(u, v) = ∫ (K * u²) v²`.
    pub fn bilinear_coupling(&self, u: &ScalarField, v: &ScalarField) -> Result<f64> {
        self.check(u)?;
        self.check(v)?;
        let phi = self.solve_phi(u)?;
        coupling(v, &phi)
    }
}

/// `φ_u` for a one-off call; builds the padded kernel each time.
pub fn solve_phi(u: &ScalarField, a: f64) -> Result<ScalarField> {
    BpKernel::new(u.grid(), a)?.solve_phi(u)
}

/// `∫ φ u²`.
pub fn coupling(u: &ScalarField, phi: &ScalarField) -> Result<f64> {
    u.ensure_same_grid(phi)?;
    let sum: f64 = u.values().iter().zip(phi.values()).map(|(u, p)| p * u * u).sum();
    Ok(sum * u.grid().cell_volume())
}

/// Truncated electrostatic energies of the point-charge potentials over the
/// shell `ε < r < r_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelEnergies {
    pub epsilon: f64,
    pub r_max: f64,
    /// `½∫|∇(1/r)|²`.
    pub maxwell_truncated: f64,
    /// `½∫|∇K|² + (a²/2)∫|ΔK|²`.
    pub bp_truncated: f64,
}

const PANELS_PER_DECADE: usize = 8;
const RULE_ORDER: usize = 16;

pub fn kernel_energies(a: f64, epsilon: f64, r_max: f64) -> Result<KernelEnergies> {
    kernel_k(0.0, a)?;
    if !(epsilon > 0.0 && r_max.is_finite() && epsilon < r_max) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < epsilon < r_max, got epsilon = {epsilon}, r_max = {r_max}"
        )));
    }
    let shell = |r: f64| 4.0 * PI * r * r;
    let maxwell = integrate_log_panels(
        |r| 0.5 * shell(r) / r.powi(4),
        epsilon,
        r_max,
        PANELS_PER_DECADE,
        RULE_ORDER,
    );
    let bp = integrate_log_panels(
        |r| {
            let slope = kernel_slope(r, a);
            let lap = kernel_laplacian(r, a);
            shell(r) * (0.5 * slope * slope + 0.5 * a * a * lap * lap)
        },
        epsilon,
        r_max,
        PANELS_PER_DECADE,
        RULE_ORDER,
    );
    Ok(KernelEnergies {
        epsilon,
        r_max,
        maxwell_truncated: maxwell,
        bp_truncated: bp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{integrate, lp_norm, make_grid};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    fn bump(grid: &Arc<Grid>) -> ScalarField {
        ScalarField::from_fn(grid, |x, y, z| {
            (1.0 + 0.3 * x - 0.2 * y * z) * (-(x * x + y * y + z * z) / 3.0).exp()
        })
    }

    #[test]
    fn kernel_values() {
        assert_eq!(kernel_k(0.0, 2.0).unwrap(), 0.5);
        assert!((kernel_k(1.0, 1.0).unwrap() - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!(kernel_k(1.0, 0.0).is_err());
        assert!(kernel_k(-1.0, 1.0).is_err());
    }

    #[test]
    fn kernel_below_coulomb_and_converges() {
        for &r in &[0.01, 0.1, 1.0, 5.0, 30.0] {
            let coulomb = CoulombKernel::new(1e-9).unwrap().value(r);
            assert!(kernel_value(r, 1.0) < coulomb);
            let gap_wide = coulomb - kernel_value(r, 1.0);
            let gap_narrow = coulomb - kernel_value(r, 1e-3);
            assert!(gap_narrow < gap_wide);
            assert!(rel(kernel_value(r, 1e-4), coulomb) < 1e-6 || r < 0.1);
        }
    }

    #[test]
    fn kernel_strictly_decreasing_and_bounded() {
        let a = 0.7;
        let mut prev = kernel_value(0.0, a);
        assert_eq!(prev, 1.0 / a);
        for i in 1..2000 {
            let k = kernel_value(i as f64 * 0.01, a);
            assert!(k > 0.0 && k < prev);
            prev = k;
        }
    }

    #[test]
    fn slope_matches_finite_difference() {
        let a = 1.3;
        for &r in &[1e-4f64, 5e-4, 2e-3, 0.1, 1.0, 4.0] {
            let d = 1e-6 * r.max(1e-3);
            let fd = (kernel_value(r + d, a) - kernel_value(r - d, a)) / (2.0 * d);
            assert!((kernel_slope(r, a) - fd).abs() < 1e-6, "r = {r}");
        }
    }

    #[test]
    fn laplacian_matches_radial_finite_difference() {
        let a = 0.8;
        for &r in &[0.05, 0.5, 2.0] {
            let d = 1e-4;
            let second = (kernel_value(r + d, a) - 2.0 * kernel_value(r, a) + kernel_value(r - d, a)) / (d * d);
            let lap = second + 2.0 * kernel_slope(r, a) / r;
            assert!(rel(kernel_laplacian(r, a), lap) < 1e-5);
        }
    }

    #[test]
    fn zero_field_gives_zero_potential() {
        let g = make_grid(4.0, 8).unwrap();
        let phi = solve_phi(&ScalarField::zeros(&g), 1.0).unwrap();
        assert_eq!(phi.max_abs(), 0.0);
        assert!(solve_phi(&ScalarField::zeros(&g), -1.0).is_err());
    }

    #[test]
    fn quadratic_scaling_and_positivity() {
        let g = make_grid(6.0, 16).unwrap();
        let kernel = BpKernel::new(&g, 1.0).unwrap();
        let u = bump(&g);
        let phi = kernel.solve_phi(&u).unwrap();
        let phi2 = kernel.solve_phi(&u.scaled(2.0)).unwrap();
        for (a, b) in phi2.values().iter().zip(phi.values()) {
            assert!((a - 4.0 * b).abs() <= 1e-12 * b.abs());
        }
        assert!(phi.min() >= -1e-14 * phi.max());
    }

    #[test]
    fn coupling_bound_and_quartic_scaling() {
        let g = make_grid(6.0, 16).unwrap();
        let a = 0.5;
        let kernel = BpKernel::new(&g, a).unwrap();
        let u = bump(&g);
        let b = coupling(&u, &kernel.solve_phi(&u).unwrap()).unwrap();
        let l2 = lp_norm(&u, 2.0).unwrap();
        assert!(b > 0.0 && b <= l2.powi(4) / a * (1.0 + 1e-8));
        let u3 = u.scaled(3.0);
        let b3 = coupling(&u3, &kernel.solve_phi(&u3).unwrap()).unwrap();
        assert!(rel(b3, 81.0 * b) < 1e-12);
        assert_eq!(coupling(&ScalarField::zeros(&g), &ScalarField::zeros(&g)).unwrap(), 0.0);
    }

    #[test]
    fn bilinear_is_symmetric() {
        let g = make_grid(6.0, 16).unwrap();
        let kernel = BpKernel::new(&g, 1.0).unwrap();
        let u = bump(&g);
        let v = ScalarField::from_fn(&g, |x, y, _| (x - y).sin() * (-(x * x + y * y) / 4.0).exp());
        let uv = kernel.bilinear_coupling(&u, &v).unwrap();
        let vu = kernel.bilinear_coupling(&v, &u).unwrap();
        assert!(rel(uv, vu) < 1e-10);
        let uu = kernel.bilinear_coupling(&u, &u).unwrap();
        assert_eq!(uu, coupling(&u, &kernel.solve_phi(&u).unwrap()).unwrap());
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let g = make_grid(6.0, 8).unwrap();
        let other = make_grid(5.0, 8).unwrap();
        let kernel = BpKernel::new(&g, 1.0).unwrap();
        assert!(matches!(
            kernel.solve_phi(&ScalarField::zeros(&other)),
            Err(Error::GridMismatch)
        ));
    }

    #[test]
    fn total_charge_far_field() {
        // far from a compact density φ ≈ Q / r
        let g = make_grid(8.0, 32).unwrap();
        let u = ScalarField::from_fn(&g, |x, y, z| (-(x * x + y * y + z * z)).exp());
        let phi = solve_phi(&u, 0.1).unwrap();
        let q = integrate(&u.map(|v| v * v));
        let corner = phi.values()[0];
        let r = g.position(0).iter().map(|c| c * c).sum::<f64>().sqrt();
        assert!(rel(corner, q / r) < 1e-3);
    }

    #[test]
    fn kernel_energies_reject_bad_radii() {
        assert!(kernel_energies(1.0, 0.0, 1.0).is_err());
        assert!(kernel_energies(1.0, 2.0, 1.0).is_err());
        assert!(kernel_energies(0.0, 0.1, 1.0).is_err());
    }
}
