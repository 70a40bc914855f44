//! Truncated periodic box, rectangle-rule quadrature and spectral operators.
//!
//! The box is `[-L, L)^3` with `N` cell-centred nodes per axis,
//! `x_j = -L + (j + 1/2) h`, `h = 2L/N`. Cell centring makes the node set
//! symmetric under `x -> -x`, so odd and even fields stay exactly odd and even
//! under every operator in the crate.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::Fft3;

pub const MIN_POINTS: usize = 8;
pub const MAX_POINTS: usize = 256;

/// Discretization of `-Δ`. Both are Fourier multipliers on the periodic box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stencil {
    /// Symbol `|k|²`, exact on every resolved mode.
    #[default]
    Spectral,
    /// Seven-point stencil, symbol `Σ (2/h)² sin²(k_j h / 2)`. Its Dirichlet
    /// form is a sum over grid edges, so `J(|u|) <= J(u)` holds exactly.
    SecondOrder,
}

#[derive(Debug, Clone)]
pub struct Grid {
    half_length: f64,
    n: usize,
    spacing: f64,
    stencil: Stencil,
    wavenumbers: Vec<f64>,
    symbols: Vec<f64>,
    fft: Fft3,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.half_length == other.half_length && self.stencil == other.stencil
    }
}

/// Builds a shared grid; see [`Grid::new`].
pub fn make_grid(half_length: f64, n: usize) -> Result<Arc<Grid>> {
    Grid::new(half_length, n).map(Arc::new)
}

pub fn make_grid_with(half_length: f64, n: usize, stencil: Stencil) -> Result<Arc<Grid>> {
    Grid::with_stencil(half_length, n, stencil).map(Arc::new)
}

impl Grid {
    pub fn new(half_length: f64, n: usize) -> Result<Self> {
        Self::with_stencil(half_length, n, Stencil::Spectral)
    }

    pub fn with_stencil(half_length: f64, n: usize, stencil: Stencil) -> Result<Self> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "half length L must be positive, got {half_length}"
            )));
        }
        if !n.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "points per axis N must be even, got {n}"
            )));
        }
        if !(MIN_POINTS..=MAX_POINTS).contains(&n) {
            return Err(Error::InvalidParameter(format!(
                "points per axis N must lie in [{MIN_POINTS}, {MAX_POINTS}], got {n}"
            )));
        }
        let spacing = 2.0 * half_length / n as f64;
        let wavenumbers = (0..n)
            .map(|j| {
                let signed = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
                PI * signed / half_length
            })
            .collect::<Vec<f64>>();
        let symbols = wavenumbers
            .iter()
            .map(|&k| match stencil {
                Stencil::Spectral => k * k,
                Stencil::SecondOrder => (2.0 / spacing * (0.5 * k * spacing).sin()).powi(2),
            })
            .collect();
        Ok(Self {
            half_length,
            n,
            spacing,
            stencil,
            wavenumbers,
            symbols,
            fft: Fft3::new(n),
        })
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Angular wavenumbers `k_j = π j / L`, `j` in `-N/2 .. N/2 - 1`, in FFT order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(3)
    }

    pub fn coordinate(&self, j: usize) -> f64 {
        -self.half_length + (j as f64 + 0.5) * self.spacing
    }

    pub fn index(&self, i0: usize, i1: usize, i2: usize) -> usize {
        (i0 * self.n + i1) * self.n + i2
    }

    pub fn split_index(&self, index: usize) -> [usize; 3] {
        let n = self.n;
        [index / (n * n), (index / n) % n, index % n]
    }

    pub fn position(&self, index: usize) -> [f64; 3] {
        let [i0, i1, i2] = self.split_index(index);
        [self.coordinate(i0), self.coordinate(i1), self.coordinate(i2)]
    }

    /// `|k|^2` at a flat spectral index.
    pub fn k_squared(&self, index: usize) -> f64 {
        let [i0, i1, i2] = self.split_index(index);
        let k = &self.wavenumbers;
        k[i0] * k[i0] + k[i1] * k[i1] + k[i2] * k[i2]
    }

    pub fn stencil(&self) -> Stencil {
        self.stencil
    }

    /// Symbol of `-Δ` for the grid's stencil at a flat spectral index; equals
    /// [`Grid::k_squared`] for the spectral stencil.
    pub fn laplacian_symbol(&self, index: usize) -> f64 {
        let [i0, i1, i2] = self.split_index(index);
        self.symbols[i0] + self.symbols[i1] + self.symbols[i2]
    }

    pub(crate) fn to_spectrum(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft.forward(&mut buf);
        buf
    }

    pub(crate) fn values_from_spectrum(&self, mut spectrum: Vec<Complex64>) -> Vec<f64> {
        self.fft.inverse(&mut spectrum);
        spectrum.into_iter().map(|c| c.re).collect()
    }
}

/// Real field sampled at the nodes of a grid.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl PartialEq for ScalarField {
    fn eq(&self, other: &Self) -> bool {
        *self.grid == *other.grid && self.values == other.values
    }
}

impl ScalarField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self {
            grid: Arc::clone(grid),
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: &Arc<Grid>, value: f64) -> Self {
        Self {
            grid: Arc::clone(grid),
            values: vec![value; grid.len()],
        }
    }

    pub fn from_values(grid: &Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            grid: Arc::clone(grid),
            values,
        })
    }

    /// Samples `f(x, y, z)` at every node.
    pub fn from_fn<F>(grid: &Arc<Grid>, f: F) -> Self
    where
        F: Fn(f64, f64, f64) -> f64,
    {
        let values = (0..grid.len())
            .map(|i| {
                let [x, y, z] = grid.position(i);
                f(x, y, z)
            })
            .collect();
        Self {
            grid: Arc::clone(grid),
            values,
        }
    }

    pub(crate) fn from_raw(grid: &Arc<Grid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self {
            grid: Arc::clone(grid),
            values,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn same_grid(&self, other: &ScalarField) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub fn ensure_same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self::from_raw(&self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        self.map(|v| factor * v)
    }

    /// `self + factor * other`.
    pub fn axpy(&self, factor: f64, other: &ScalarField) -> Result<Self> {
        self.zip_with(other, |a, b| a + factor * b)
    }

    pub fn add(&self, other: &ScalarField) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &ScalarField) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &ScalarField, f: F) -> Result<Self> {
        self.ensure_same_grid(other)?;
        Ok(Self::from_raw(
            &self.grid,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        ))
    }

    /// `∫ self · other` by the rectangle rule.
    pub fn dot(&self, other: &ScalarField) -> Result<f64> {
        self.ensure_same_grid(other)?;
        Ok(self.dot_unchecked(other))
    }

    pub(crate) fn dot_unchecked(&self, other: &ScalarField) -> f64 {
        let sum: f64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        sum * self.grid.cell_volume()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Cyclic shift by whole nodes along each axis.
    pub fn shifted(&self, shift: [isize; 3]) -> Self {
        let g = &self.grid;
        let n = g.points_per_axis() as isize;
        let mut out = vec![0.0; self.values.len()];
        for (i, v) in self.values.iter().enumerate() {
            let [a, b, c] = g.split_index(i);
            let wrap = |x: usize, s: isize| (x as isize + s).rem_euclid(n) as usize;
            out[g.index(wrap(a, shift[0]), wrap(b, shift[1]), wrap(c, shift[2]))] = *v;
        }
        Self::from_raw(&self.grid, out)
    }
}

/// `Σ f h³` over all nodes.
pub fn integrate(f: &ScalarField) -> f64 {
    f.values.iter().sum::<f64>() * f.grid.cell_volume()
}

/// `(∫|f|^p)^{1/p}`; `p = f64::INFINITY` gives the max norm.
pub fn lp_norm(f: &ScalarField, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "Lebesgue exponent must lie in [1, inf], got {p}"
        )));
    }
    if p.is_infinite() {
        return Ok(f.max_abs());
    }
    let h3 = f.grid.cell_volume();
    let sum: f64 = if p == 2.0 {
        f.values.iter().map(|v| v * v).sum()
    } else {
        f.values.iter().map(|v| v.abs().powf(p)).sum()
    };
    Ok((sum * h3).powf(1.0 / p))
}

pub fn l2_norm(f: &ScalarField) -> f64 {
    (f.values.iter().map(|v| v * v).sum::<f64>() * f.grid.cell_volume()).sqrt()
}

/// `∫|∇u|²` evaluated in spectral space (Parseval).
pub fn kinetic(u: &ScalarField) -> f64 {
    let g = &u.grid;
    let spectrum = g.to_spectrum(&u.values);
    let sum: f64 = spectrum
        .iter()
        .enumerate()
        .map(|(i, c)| g.laplacian_symbol(i) * c.norm_sqr())
        .sum();
    sum * g.cell_volume() / g.len() as f64
}

/// `∫|∇u|² + ∫V u²`. The potential is given as a sampled field and must be
/// nonnegative at every node.
pub fn h1v_norm_sq(u: &ScalarField, potential: &ScalarField) -> Result<f64> {
    u.ensure_same_grid(potential)?;
    check_potential(potential)?;
    Ok(kinetic(u) + weighted_l2_sq(u, potential))
}

pub(crate) fn check_potential(potential: &ScalarField) -> Result<()> {
    match potential.values.iter().position(|&v| v < 0.0) {
        Some(index) => Err(Error::NegativePotential {
            index,
            value: potential.values[index],
        }),
        None => Ok(()),
    }
}

pub(crate) fn weighted_l2_sq(u: &ScalarField, weight: &ScalarField) -> f64 {
    let sum: f64 = u.values.iter().zip(&weight.values).map(|(a, w)| w * a * a).sum();
    sum * u.grid.cell_volume()
}

/// Applies a real multiplier `m(λ)` where `λ` is the symbol of `-Δ`.
pub(crate) fn apply_multiplier<F: Fn(f64) -> f64>(u: &ScalarField, m: F) -> ScalarField {
    let g = &u.grid;
    let mut spectrum = g.to_spectrum(&u.values);
    for (i, c) in spectrum.iter_mut().enumerate() {
        *c *= m(g.laplacian_symbol(i));
    }
    ScalarField::from_raw(&u.grid, g.values_from_spectrum(spectrum))
}

/// `-Δu`: inverse transform of `|k|² û` (or of the stencil symbol).
pub fn neg_laplacian(u: &ScalarField) -> ScalarField {
    apply_multiplier(u, |k2| k2)
}

/// `Δu`: inverse transform of `-|k|² û`.
pub fn spectral_laplacian(u: &ScalarField) -> ScalarField {
    apply_multiplier(u, |k2| -k2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn spacing_and_wavenumbers() {
        let g = make_grid(8.0, 16).unwrap();
        assert_eq!(g.spacing(), 1.0);
        let g = make_grid(8.0, 32).unwrap();
        assert_eq!(g.wavenumbers()[0], 0.0);
        assert_eq!(g.wavenumbers().len(), 32);
        assert!((g.wavenumbers()[1] - PI / 8.0).abs() < 1e-15);
        assert!((g.wavenumbers()[16] + PI * 16.0 / 8.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(matches!(make_grid(8.0, 15), Err(Error::InvalidParameter(_))));
        assert!(matches!(make_grid(8.0, 6), Err(Error::InvalidParameter(_))));
        assert!(matches!(make_grid(8.0, 258), Err(Error::InvalidParameter(_))));
        assert!(matches!(make_grid(0.0, 16), Err(Error::InvalidParameter(_))));
        assert!(matches!(make_grid(-1.0, 16), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn integrate_constant_and_mode() {
        let g = make_grid(8.0, 16).unwrap();
        assert!((integrate(&ScalarField::constant(&g, 1.0)) - 4096.0).abs() < 1e-9);
        assert_eq!(integrate(&ScalarField::zeros(&g)), 0.0);
        let l = g.half_length();
        let s2 = ScalarField::from_fn(&g, |x, _, _| (PI * x / l).sin().powi(2));
        assert!(rel(integrate(&s2), 4096.0 / 2.0) < 1e-13);
    }

    #[test]
    fn lp_norms() {
        let g = make_grid(8.0, 16).unwrap();
        let c = ScalarField::constant(&g, -3.0);
        for p in [1.0, 2.0, 3.5] {
            let expected = 3.0 * 16f64.powf(3.0 / p);
            assert!(rel(lp_norm(&c, p).unwrap(), expected) < 1e-13);
        }
        let mut values = vec![0.0; g.len()];
        values[123] = 5.0;
        values[7] = -2.0;
        let spike = ScalarField::from_values(&g, values).unwrap();
        assert_eq!(lp_norm(&spike, f64::INFINITY).unwrap(), 5.0);
        assert!(lp_norm(&spike, 0.5).is_err());
        assert!(lp_norm(&spike, f64::NAN).is_err());
    }

    #[test]
    fn l2_matches_direct_sum() {
        let g = make_grid(4.0, 16).unwrap();
        let u = ScalarField::from_fn(&g, |x, y, z| (x * 1.3).sin() * (y - z).cos() + 0.1 * x * y);
        let mut direct = 0.0;
        for v in u.values() {
            direct += v * v * g.spacing() * g.spacing() * g.spacing();
        }
        assert!(rel(lp_norm(&u, 2.0).unwrap(), direct.sqrt()) < 1e-13);
    }

    #[test]
    fn h1v_single_mode() {
        let g = make_grid(8.0, 16).unwrap();
        let l = g.half_length();
        let one = ScalarField::constant(&g, 1.0);
        let u = ScalarField::from_fn(&g, |x, _, _| (PI * x / l).sin());
        let expected = ((PI / l).powi(2) + 1.0) * (2.0 * l).powi(3) / 2.0;
        assert!(rel(h1v_norm_sq(&u, &one).unwrap(), expected) < 1e-12);
        assert_eq!(h1v_norm_sq(&ScalarField::zeros(&g), &one).unwrap(), 0.0);
    }

    #[test]
    fn h1v_rejects_negative_potential() {
        let g = make_grid(8.0, 8).unwrap();
        let u = ScalarField::constant(&g, 1.0);
        let v = ScalarField::from_fn(&g, |x, _, _| x);
        assert!(matches!(h1v_norm_sq(&u, &v), Err(Error::NegativePotential { .. })));
    }

    #[test]
    fn h1v_against_finite_differences() {
        let g = make_grid(8.0, 32).unwrap();
        let sigma = 3.0;
        let u = ScalarField::from_fn(&g, |x, y, z| (-(x * x + y * y + z * z) / (2.0 * sigma * sigma)).exp());
        let v = ScalarField::from_fn(&g, |x, y, z| 1.0 + 0.25 * (x * x + y * y + z * z));
        // second-order central differences, periodic wrap
        let n = g.points_per_axis() as isize;
        let h = g.spacing();
        let mut grad_sq = 0.0;
        for i in 0..g.len() {
            let idx = g.split_index(i);
            for axis in 0..3 {
                let mut up = idx;
                let mut down = idx;
                up[axis] = ((idx[axis] as isize + 1).rem_euclid(n)) as usize;
                down[axis] = ((idx[axis] as isize - 1).rem_euclid(n)) as usize;
                let d = (u.values()[g.index(up[0], up[1], up[2])] - u.values()[g.index(down[0], down[1], down[2])])
                    / (2.0 * h);
                grad_sq += d * d;
            }
        }
        let fd = grad_sq * g.cell_volume() + weighted_l2_sq(&u, &v);
        let spectral = h1v_norm_sq(&u, &v).unwrap();
        assert!(rel(spectral, fd) < 1e-3, "spectral {spectral} fd {fd}");
    }

    #[test]
    fn laplacian_of_mode_and_constant() {
        let g = make_grid(8.0, 16).unwrap();
        let l = g.half_length();
        let c = neg_laplacian(&ScalarField::constant(&g, 2.5));
        assert!(c.max_abs() < 1e-13);
        let u = ScalarField::from_fn(&g, |x, _, _| (PI * x / l).sin());
        let lap = neg_laplacian(&u);
        let k2 = (PI / l).powi(2);
        for (a, b) in lap.values().iter().zip(u.values()) {
            assert!((a - k2 * b).abs() < 1e-13);
        }
        let lap = spectral_laplacian(&u);
        for (a, b) in lap.values().iter().zip(u.values()) {
            assert!((a + k2 * b).abs() < 1e-13);
        }
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = make_grid(8.0, 8).unwrap();
        let b = make_grid(4.0, 8).unwrap();
        let u = ScalarField::zeros(&a);
        let v = ScalarField::zeros(&b);
        assert!(matches!(u.add(&v), Err(Error::GridMismatch)));
        assert!(matches!(u.dot(&v), Err(Error::GridMismatch)));
        // equal parameters on distinct allocations are the same grid
        let c = make_grid(8.0, 8).unwrap();
        assert!(u.add(&ScalarField::zeros(&c)).is_ok());
    }

    #[test]
    fn from_values_rejects_nan() {
        let g = make_grid(8.0, 8).unwrap();
        let mut values = vec![0.0; g.len()];
        values[3] = f64::NAN;
        assert!(matches!(
            ScalarField::from_values(&g, values),
            Err(Error::NonFinite { index: 3 })
        ));
    }

    #[test]
    fn nodes_are_symmetric() {
        let g = make_grid(3.0, 8).unwrap();
        let n = g.points_per_axis();
        for j in 0..n {
            assert!((g.coordinate(j) + g.coordinate(n - 1 - j)).abs() < 1e-15);
        }
    }

    fn seven_point(u: &ScalarField) -> ScalarField {
        let g = u.grid();
        let n = g.points_per_axis();
        let h2 = g.spacing() * g.spacing();
        let v = u.values();
        let at = |i: usize, j: usize, k: usize| v[g.index(i % n, j % n, k % n)];
        let out = (0..g.len())
            .map(|idx| {
                let [i, j, k] = g.split_index(idx);
                let (ip, jp, kp) = (i + n, j + n, k + n);
                (6.0 * at(i, j, k)
                    - at(ip + 1, j, k)
                    - at(ip - 1, j, k)
                    - at(i, jp + 1, k)
                    - at(i, jp - 1, k)
                    - at(i, j, kp + 1)
                    - at(i, j, kp - 1))
                    / h2
            })
            .collect();
        ScalarField::from_values(g, out).unwrap()
    }

    fn rough_field(g: &Arc<Grid>) -> ScalarField {
        ScalarField::from_fn(g, |x, y, z| {
            (1.7 * x + 0.3).sin() * (0.9 * y).cos() + (x * y - z).sin() * (-0.1 * (x * x + z * z)).exp()
        })
    }

    #[test]
    fn second_order_symbol_is_the_seven_point_stencil() {
        let g = make_grid_with(4.0, 16, Stencil::SecondOrder).unwrap();
        let u = rough_field(&g);
        let a = neg_laplacian(&u);
        let b = seven_point(&u);
        let scale = b.max_abs();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() <= 1e-12 * scale);
        }
        // Dirichlet form: sum over edges of squared differences
        let h = g.spacing();
        let edges: f64 = (0..g.len())
            .map(|idx| {
                let [i, j, k] = g.split_index(idx);
                let n = g.points_per_axis();
                let v = u.values();
                let c = v[idx];
                [
                    g.index((i + 1) % n, j, k),
                    g.index(i, (j + 1) % n, k),
                    g.index(i, j, (k + 1) % n),
                ]
                .iter()
                .map(|&o| (v[o] - c).powi(2))
                .sum::<f64>()
            })
            .sum::<f64>()
            * h;
        assert!(rel(kinetic(&u), edges) < 1e-12);
    }

    #[test]
    fn second_order_kinetic_obeys_kato() {
        let g = make_grid_with(4.0, 16, Stencil::SecondOrder).unwrap();
        let u = rough_field(&g);
        let abs = u.map(f64::abs);
        assert!(u.min() < 0.0);
        assert!(kinetic(&abs) <= kinetic(&u));
    }

    #[test]
    fn stencils_agree_on_smooth_fields() {
        let u = |g: &Arc<Grid>| ScalarField::from_fn(g, |x, y, z| (-(x * x + y * y + z * z) / 2.0).exp());
        let gs = make_grid_with(8.0, 64, Stencil::Spectral).unwrap();
        let gf = make_grid_with(8.0, 64, Stencil::SecondOrder).unwrap();
        assert_ne!(*gs, *gf);
        // second-order error: h²/12 · ∫|∂²u|² terms, a few 1e-3 here
        assert!(rel(kinetic(&u(&gs)), kinetic(&u(&gf))) < 2e-2);
        assert!(rel(kinetic(&u(&gs)), kinetic(&u(&gf))) > 1e-5);
    }
}
