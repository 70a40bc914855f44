//! The functional
//! `J(u) = ½‖u‖² + (q²/4)∫φ_u u² − ∫F(u)`, `‖u‖² = ∫|∇u|² + ∫V u²`,
//! its gradient field and the Nehari residual `⟨J'(u), u⟩`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bp_field::{coupling, BpKernel};
use crate::error::{Error, Result};
use crate::grid::{self, Grid, ScalarField};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    /// `½‖u‖²`.
    pub kinetic_potential: f64,
    /// `(q²/4)∫φ_u u²`.
    pub nonlocal: f64,
    /// `∫F(u)`.
    pub nonlinear: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn new(kinetic_potential: f64, nonlocal: f64, nonlinear: f64) -> Self {
        Self {
            kinetic_potential,
            nonlocal,
            nonlinear,
            total: kinetic_potential + nonlocal - nonlinear,
        }
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }
}

/// A model discretized on a grid: sampled potential plus the padded kernel.
#[derive(Debug, Clone)]
pub struct Problem {
    grid: Arc<Grid>,
    model: ModelParams,
    potential: ScalarField,
    kernel: BpKernel,
}

/// Quantities of a field that are reused by energies, gradients and
/// projections.
#[derive(Debug, Clone)]
pub(crate) struct FieldTerms {
    pub phi: ScalarField,
    /// `-Δu`.
    pub neg_lap: ScalarField,
    /// `‖u‖²`.
    pub norm_sq: f64,
    /// `∫φ_u u²`.
    pub coupling: f64,
}

impl Problem {
    pub fn new(grid: &Arc<Grid>, model: ModelParams) -> Result<Self> {
        let model = ModelParams::new(model.a, model.q, model.nonlinearity, model.potential)?;
        let potential = model.potential.sample(grid);
        grid::check_potential(&potential)?;
        Ok(Self {
            grid: Arc::clone(grid),
            model,
            kernel: BpKernel::new(grid, model.a)?,
            potential,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn model(&self) -> &ModelParams {
        &self.model
    }

    pub fn potential(&self) -> &ScalarField {
        &self.potential
    }

    pub fn kernel(&self) -> &BpKernel {
        &self.kernel
    }

    pub(crate) fn check(&self, u: &ScalarField) -> Result<()> {
        if **u.grid() == *self.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `‖u‖² = ∫|∇u|² + ∫V u²`.
    pub fn norm_sq(&self, u: &ScalarField) -> Result<f64> {
        self.check(u)?;
        Ok(grid::kinetic(u) + grid::weighted_l2_sq(u, &self.potential))
    }

    pub(crate) fn terms(&self, u: &ScalarField) -> FieldTerms {
        let neg_lap = grid::neg_laplacian(u);
        let norm_sq = u.dot_unchecked(&neg_lap) + grid::weighted_l2_sq(u, &self.potential);
        let phi = self.kernel.convolve_density(u.values().iter().map(|v| v * v));
        let coupling = coupling(u, &phi).expect("same grid");
        FieldTerms {
            phi,
            neg_lap,
            norm_sq,
            coupling,
        }
    }

    pub(crate) fn nonlinear_integral(&self, u: &ScalarField) -> f64 {
        let f = &self.model.nonlinearity;
        u.values().iter().map(|&v| f.big_f(v)).sum::<f64>() * self.grid.cell_volume()
    }

    /// `∫ f(u) u`.
    pub(crate) fn f_u_u(&self, u: &ScalarField) -> f64 {
        let f = &self.model.nonlinearity;
        u.values().iter().map(|&v| f.f(v) * v).sum::<f64>() * self.grid.cell_volume()
    }

    pub(crate) fn breakdown_from(&self, terms: &FieldTerms, u: &ScalarField) -> EnergyBreakdown {
        let q2 = self.model.q * self.model.q;
        EnergyBreakdown::new(
            0.5 * terms.norm_sq,
            0.25 * q2 * terms.coupling,
            self.nonlinear_integral(u),
        )
    }

    pub(crate) fn grad_from(&self, terms: &FieldTerms, u: &ScalarField) -> ScalarField {
        let q2 = self.model.q * self.model.q;
        let f = &self.model.nonlinearity;
        let values = u
            .values()
            .iter()
            .zip(terms.neg_lap.values())
            .zip(self.potential.values())
            .zip(terms.phi.values())
            .map(|(((&u, &lap), &v), &phi)| lap + v * u + q2 * phi * u - f.f(u))
            .collect();
        ScalarField::from_raw(&self.grid, values)
    }

    pub fn evaluate_j(&self, u: &ScalarField) -> Result<EnergyBreakdown> {
        self.check(u)?;
        Ok(self.breakdown_from(&self.terms(u), u))
    }

    /// Strong-form gradient `-Δu + Vu + q²φ_u u − f(u)`; `∫ g v` is the
    /// derivative of `J` at `u` in direction `v`.
    pub fn evaluate_grad(&self, u: &ScalarField) -> Result<ScalarField> {
        self.check(u)?;
        Ok(self.grad_from(&self.terms(u), u))
    }

    /// `⟨J'(u), u⟩ = ‖u‖² + q²∫φ_u u² − ∫f(u)u`.
    pub fn nehari_residual(&self, u: &ScalarField) -> Result<f64> {
        self.check(u)?;
        let t = self.terms(u);
        let q2 = self.model.q * self.model.q;
        Ok(t.norm_sq + q2 * t.coupling - self.f_u_u(u))
    }

    /// Potential `φ_u`.
    pub fn phi(&self, u: &ScalarField) -> Result<ScalarField> {
        self.kernel.solve_phi(u)
    }

    /// Applies `(-Δ + V₀)^{-1}` in spectral space.
    pub fn precondition(&self, g: &ScalarField) -> ScalarField {
        let shift = self.model.potential.v0;
        grid::apply_multiplier(g, |k2| 1.0 / (k2 + shift))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::model::{Nonlinearity, Potential};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    fn gaussian(grid: &Arc<Grid>, amp: f64, sigma: f64) -> ScalarField {
        ScalarField::from_fn(grid, |x, y, z| {
            amp * (-(x * x + y * y + z * z) / (2.0 * sigma * sigma)).exp()
        })
    }

    #[test]
    fn zero_field() {
        let g = make_grid(6.0, 16).unwrap();
        let p = Problem::new(&g, ModelParams::baseline()).unwrap();
        let z = ScalarField::zeros(&g);
        assert_eq!(p.evaluate_j(&z).unwrap().total, 0.0);
        assert_eq!(p.evaluate_grad(&z).unwrap().max_abs(), 0.0);
        assert_eq!(p.nehari_residual(&z).unwrap(), 0.0);
    }

    #[test]
    fn breakdown_is_consistent() {
        let g = make_grid(6.0, 16).unwrap();
        let p = Problem::new(&g, ModelParams::baseline()).unwrap();
        let e = p.evaluate_j(&gaussian(&g, 1.3, 1.2)).unwrap();
        assert!(e.nonlocal >= 0.0 && e.nonlinear >= 0.0);
        let sum = e.kinetic_potential + e.nonlocal - e.nonlinear;
        assert!(rel(e.total, sum) < 1e-13);
    }

    #[test]
    fn scaling_decomposition() {
        let g = make_grid(6.0, 16).unwrap();
        let model = ModelParams::baseline().with_nonlinearity(Nonlinearity::LogPower);
        let p = Problem::new(&g, model).unwrap();
        let u = gaussian(&g, 0.8, 1.1);
        let t = 1.7;
        let tu = u.scaled(t);
        let base = p.terms(&u);
        let direct = p.evaluate_j(&tu).unwrap().total;
        let predicted = 0.5 * t * t * base.norm_sq + 0.25 * t.powi(4) * base.coupling - p.nonlinear_integral(&tu);
        assert!(rel(direct, predicted) < 1e-12);

        let res = p.nehari_residual(&tu).unwrap();
        let predicted = t * t * base.norm_sq + t.powi(4) * base.coupling - p.f_u_u(&tu);
        assert!(rel(res, predicted) < 1e-12);
    }

    #[test]
    fn gradient_pairing_equals_nehari_residual() {
        let g = make_grid(6.0, 16).unwrap();
        let p = Problem::new(&g, ModelParams::baseline()).unwrap();
        let u = gaussian(&g, 1.5, 1.0);
        let grad = p.evaluate_grad(&u).unwrap();
        let pairing = grad.dot(&u).unwrap();
        assert!(rel(pairing, p.nehari_residual(&u).unwrap()) < 1e-12);
    }

    #[test]
    fn local_problem_matches_analytic_gaussian() {
        // q = 0, p = 5, V = v0 + ω|x|²: every term of J has a closed form
        let g = make_grid(8.0, 32).unwrap();
        let (v0, omega) = (1.0, 0.25);
        let model = ModelParams::new(
            1.0,
            0.0,
            Nonlinearity::power(5.0).unwrap(),
            Potential::harmonic(v0, omega).unwrap(),
        )
        .unwrap();
        let p = Problem::new(&g, model).unwrap();
        let (amp, sigma) = (0.9f64, 1.4f64);
        let u = gaussian(&g, amp, sigma);
        let pi = std::f64::consts::PI;
        let l2 = amp * amp * (pi * sigma * sigma).powf(1.5);
        let grad = l2 * 3.0 / (2.0 * sigma * sigma);
        let second_moment = l2 * 3.0 * sigma * sigma / 2.0;
        let f5 = amp.powi(5) * (2.0 * pi * sigma * sigma / 5.0).powf(1.5) / 5.0;
        let exact = 0.5 * (grad + v0 * l2 + omega * second_moment) - f5;
        let e = p.evaluate_j(&u).unwrap();
        assert!(rel(e.total, exact) < 1e-6, "{} vs {exact}", e.total);

        // refined-grid oracle
        let fine = make_grid(8.0, 64).unwrap();
        let pf = Problem::new(&fine, model).unwrap();
        let ef = pf.evaluate_j(&gaussian(&fine, amp, sigma)).unwrap();
        assert!(rel(e.total, ef.total) < 1e-6);
        assert_eq!(e.nonlocal, 0.0);
    }

    #[test]
    fn grid_mismatch() {
        let g = make_grid(6.0, 16).unwrap();
        let other = make_grid(6.0, 8).unwrap();
        let p = Problem::new(&g, ModelParams::baseline()).unwrap();
        assert!(matches!(
            p.evaluate_j(&ScalarField::zeros(&other)),
            Err(Error::GridMismatch)
        ));
    }
}
