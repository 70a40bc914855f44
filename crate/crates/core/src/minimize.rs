//! Projected gradient descent for `c₀ = inf_𝒩 J` and `c₁ = inf_ℳ J`.
//!
//! Every iterate is re-projected (along its ray for the ground state, along
//! its two sign parts for the nodal solution), so energies are compared on
//! the constraint itself. On the constraint the projection maximizes `J`
//! along the fiber, hence the derivative of `J∘P` at an iterate is `J'`;
//! the Armijo test uses the slope `⟨J', d⟩` with `d` the preconditioned
//! gradient.

use std::path::PathBuf;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::energy::{EnergyBreakdown, FieldTerms, Problem};
use crate::error::{Error, Result};
use crate::grid::{l2_norm, Grid, ScalarField};
use crate::model::ModelParams;
use crate::nehari::{Fiber, NodalCoefficients, NodalRoot, NodalSystem};
use crate::sampling::band_limited_noise;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Initializer {
    /// `exp(-|x|²/2σ²)`, `σ = L/6`.
    Gaussian,
    /// Difference of two such Gaussians centred at `±L/4` on the first axis.
    Dipole,
    /// A field dump written by a previous run.
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepPolicy {
    pub initial_step: f64,
    /// Factor applied on a rejected trial.
    pub shrink: f64,
    /// Armijo constant.
    pub sufficient_decrease: f64,
    /// Factor applied to the last accepted step before the next iteration.
    pub growth: f64,
    pub max_step: f64,
    pub max_halvings: usize,
    /// Relative energy band treated as rounding noise: a trial inside it is
    /// accepted when it lowers the gradient residual instead.
    pub energy_noise: f64,
    /// Largest trial update relative to the iterate, `η‖d‖₂ <= this · ‖u‖₂`.
    pub max_relative_update: f64,
}

impl Default for StepPolicy {
    fn default() -> Self {
        Self {
            initial_step: 0.5,
            shrink: 0.5,
            sufficient_decrease: 1e-4,
            growth: 1.5,
            max_step: 4.0,
            max_halvings: 40,
            energy_noise: 1e-12,
            max_relative_update: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub max_iters: usize,
    /// Stop when `‖J'(u)‖₂ / max(1, ‖u‖₂)` falls below this.
    pub grad_tol: f64,
    pub step: StepPolicy,
    pub seed: u64,
    pub initializer: Initializer,
    /// Precondition the gradient by `(-Δ + V₀)^{-1}`.
    pub precondition: bool,
    /// Relative amplitude of the seeded multiplicative perturbation of the
    /// initial field, `u₀ (1 + noise · ξ)` with `|ξ| <= 1`. Values below one
    /// keep the sign pattern of the initializer.
    pub noise: f64,
    pub projection_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            grad_tol: 1e-6,
            step: StepPolicy::default(),
            seed: 0,
            initializer: Initializer::Gaussian,
            precondition: true,
            noise: 0.1,
            projection_tol: crate::nehari::DEFAULT_TOL,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        let s = &self.step;
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if !(self.grad_tol > 0.0) {
            return bad("grad_tol must be positive");
        }
        if !(self.projection_tol > 0.0) {
            return bad("projection_tol must be positive");
        }
        if !(s.initial_step > 0.0 && s.max_step >= s.initial_step) {
            return bad("need 0 < initial_step <= max_step");
        }
        if !(s.shrink > 0.0 && s.shrink < 1.0) {
            return bad("shrink factor must lie in (0, 1)");
        }
        if !(s.sufficient_decrease > 0.0 && s.sufficient_decrease < 1.0) {
            return bad("sufficient_decrease must lie in (0, 1)");
        }
        if !(s.energy_noise >= 0.0) {
            return bad("energy_noise must be non-negative");
        }
        if !(s.max_relative_update > 0.0) {
            return bad("max_relative_update must be positive");
        }
        if !(s.growth >= 1.0) {
            return bad("growth factor must be at least 1");
        }
        if !(self.noise >= 0.0 && self.noise < 1.0) {
            return bad("noise must lie in [0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub total: f64,
    pub kinetic_potential: f64,
    pub nonlocal: f64,
    pub nonlinear: f64,
    pub residual: f64,
    pub t: f64,
    pub s: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveKind {
    Ground,
    Nodal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProjectionSummary {
    Ground {
        t_u: f64,
        bracket: (f64, f64),
        iterations: usize,
    },
    Nodal {
        t: f64,
        s: f64,
        coefficients: NodalCoefficients,
        root: NodalRoot,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignSummary {
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub half_length: f64,
    pub points_per_axis: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub kind: SolveKind,
    pub status: SolveStatus,
    pub converged: bool,
    pub grid: GridSummary,
    pub model: ModelParams,
    pub seed: u64,
    pub energy: EnergyBreakdown,
    /// Estimate of `c₀` or `c₁`.
    pub level: f64,
    /// Energy of the first projected iterate.
    pub initial_level: f64,
    pub residual: f64,
    pub nehari_residual: f64,
    pub iterations: usize,
    pub projection: ProjectionSummary,
    pub sign: SignSummary,
    /// `(‖w⁺‖, ‖w⁻‖)` for nodal solves.
    pub component_norms: Option<(f64, f64)>,
    /// `(⟨J'(w), w⁺⟩, ⟨J'(w), w⁻⟩)` for nodal solves.
    pub component_residuals: Option<(f64, f64)>,
    /// `(‖w⁺‖² + ∫f(w⁺)w⁺, ‖w⁻‖² + ∫f(w⁻)w⁻)`, the scale of the component residuals.
    pub component_scales: Option<(f64, f64)>,
    #[serde(skip)]
    pub trace: Vec<TraceRow>,
    #[serde(skip)]
    pub field: Option<ScalarField>,
}

impl SolveReport {
    pub fn field(&self) -> &ScalarField {
        self.field
            .as_ref()
            .expect("reports produced by the solvers carry their field")
    }
}

/// `‖J'(u)‖₂ / max(1, ‖u‖₂)`.
pub fn residual_norm(problem: &Problem, u: &ScalarField) -> Result<f64> {
    let g = problem.evaluate_grad(u)?;
    Ok(l2_norm(&g) / l2_norm(u).max(1.0))
}

/// Builds the (unperturbed) initial field.
pub fn initial_field(grid: &Arc<Grid>, initializer: &Initializer) -> Result<ScalarField> {
    let l = grid.half_length();
    let sigma = l / 6.0;
    let gauss = move |x: f64, y: f64, z: f64| (-(x * x + y * y + z * z) / (2.0 * sigma * sigma)).exp();
    match initializer {
        Initializer::Gaussian => Ok(ScalarField::from_fn(grid, gauss)),
        Initializer::Dipole => {
            let c = l / 4.0;
            Ok(ScalarField::from_fn(grid, |x, y, z| {
                gauss(x - c, y, z) - gauss(x + c, y, z)
            }))
        }
        Initializer::File(path) => {
            let field = crate::io::read_field(path)?;
            let g = field.grid();
            if g.points_per_axis() != grid.points_per_axis() || g.half_length() != grid.half_length() {
                return Err(Error::GridMismatch);
            }
            ScalarField::from_values(grid, field.into_values())
        }
    }
}

fn perturbed_initial(grid: &Arc<Grid>, opts: &SolveOptions) -> Result<ScalarField> {
    let base = initial_field(grid, &opts.initializer)?;
    if opts.noise == 0.0 {
        return Ok(base);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let k_max = std::f64::consts::PI * 4.0 / grid.half_length();
    let noise = band_limited_noise(grid, &mut rng, k_max);
    base.zip_with(&noise, |u, xi| u * (1.0 + opts.noise * xi))
}

struct Iterate {
    field: ScalarField,
    terms: FieldTerms,
    energy: EnergyBreakdown,
    params: (f64, Option<f64>),
}

fn scale_terms(terms: FieldTerms, t: f64) -> FieldTerms {
    FieldTerms {
        phi: terms.phi.scaled(t * t),
        neg_lap: terms.neg_lap.scaled(t),
        norm_sq: t * t * terms.norm_sq,
        coupling: t.powi(4) * terms.coupling,
    }
}

/// Ground-state projection of a trial point: the scaled field, its terms,
/// the fibering diagnostics.
fn ground_step(problem: &Problem, trial: &ScalarField, tol: f64) -> Result<(Iterate, ProjectionSummary)> {
    let fiber = Fiber::new(problem, trial)?;
    let diag = fiber.project(tol)?;
    let t = diag.t_star;
    let terms = scale_terms(fiber.terms().clone(), t);
    let field = trial.scaled(t);
    let energy = problem.breakdown_from(&terms, &field);
    Ok((
        Iterate {
            field,
            terms,
            energy,
            params: (t, None),
        },
        ProjectionSummary::Ground {
            t_u: t,
            bracket: diag.bracket,
            iterations: diag.iterations,
        },
    ))
}

fn nodal_step(problem: &Problem, trial: &ScalarField, tol: f64) -> Result<(Iterate, ProjectionSummary)> {
    let system = NodalSystem::new(problem, trial)?;
    let root = system.solve(tol)?;
    let (t, s) = (root.t, root.s);
    let terms = system.field_terms(t, s);
    let field = system.field(t, s);
    let energy = problem.breakdown_from(&terms, &field);
    Ok((
        Iterate {
            field,
            terms,
            energy,
            params: (t, Some(s)),
        },
        ProjectionSummary::Nodal {
            t,
            s,
            coefficients: system.coeffs,
            root,
        },
    ))
}

pub fn solve_ground(model: &ModelParams, grid: &Arc<Grid>, opts: &SolveOptions) -> Result<SolveReport> {
    let problem = Problem::new(grid, *model)?;
    solve_ground_on(&problem, opts)
}

pub fn solve_ground_on(problem: &Problem, opts: &SolveOptions) -> Result<SolveReport> {
    opts.validate()?;
    let u0 = perturbed_initial(problem.grid(), opts)?;
    if l2_norm(&u0) <= crate::nehari::ZERO_FIELD_NORM {
        return Err(Error::DegenerateInitializer("initial field is zero".into()));
    }
    let start = ground_step(problem, &u0, opts.projection_tol).map_err(|e| match e {
        Error::ZeroField { .. } => Error::DegenerateInitializer("initial field is zero".into()),
        other => other,
    })?;
    descend(problem, opts, SolveKind::Ground, start, |trial| {
        ground_step(problem, trial, opts.projection_tol)
    })
}

pub fn solve_nodal(model: &ModelParams, grid: &Arc<Grid>, opts: &SolveOptions) -> Result<SolveReport> {
    let problem = Problem::new(grid, *model)?;
    solve_nodal_on(&problem, opts)
}

pub fn solve_nodal_on(problem: &Problem, opts: &SolveOptions) -> Result<SolveReport> {
    opts.validate()?;
    let w0 = perturbed_initial(problem.grid(), opts)?;
    let start = nodal_step(problem, &w0, opts.projection_tol).map_err(|e| match e {
        Error::DegenerateSignPart { plus, minus } => Error::SignCollapse(format!(
            "initial field has a vanishing sign part (|w+| = {plus:e}, |w-| = {minus:e}); \
             use the dipole initializer or a wider dipole"
        )),
        other => other,
    })?;
    descend(problem, opts, SolveKind::Nodal, start, |trial| {
        nodal_step(problem, trial, opts.projection_tol)
    })
}

fn descend<S>(
    problem: &Problem,
    opts: &SolveOptions,
    kind: SolveKind,
    start: (Iterate, ProjectionSummary),
    step: S,
) -> Result<SolveReport>
where
    S: Fn(&ScalarField) -> Result<(Iterate, ProjectionSummary)>,
{
    let (mut current, mut projection) = start;
    let initial_level = current.energy.total;
    let mut trace = Vec::new();
    let mut eta = opts.step.initial_step;
    let mut iterations = 0;
    let mut degenerate_trials = 0usize;

    let status = loop {
        let grad = problem.grad_from(&current.terms, &current.field);
        let residual = l2_norm(&grad) / l2_norm(&current.field).max(1.0);
        trace.push(TraceRow {
            iter: iterations,
            total: current.energy.total,
            kinetic_potential: current.energy.kinetic_potential,
            nonlocal: current.energy.nonlocal,
            nonlinear: current.energy.nonlinear,
            residual,
            t: current.params.0,
            s: current.params.1,
        });
        if residual <= opts.grad_tol {
            break SolveStatus::Converged;
        }
        if iterations >= opts.max_iters {
            break SolveStatus::MaxIterations;
        }
        let direction = if opts.precondition {
            problem.precondition(&grad)
        } else {
            grad.clone()
        };
        let slope = grad.dot_unchecked(&direction);
        let reach = opts.step.max_relative_update * l2_norm(&current.field) / l2_norm(&direction);
        if reach.is_finite() {
            eta = eta.min(reach);
        }
        let mut accepted = None;
        for _ in 0..=opts.step.max_halvings {
            let trial = current.field.axpy(-eta, &direction)?;
            match step(&trial) {
                Ok((next, proj)) => {
                    let bound = current.energy.total - opts.step.sufficient_decrease * eta * slope;
                    let within_noise =
                        next.energy.total <= current.energy.total + opts.step.energy_noise * current.energy.total.abs();
                    if next.energy.total <= bound || (within_noise && relative_residual(problem, &next) < residual) {
                        accepted = Some((next, proj));
                        break;
                    }
                }
                Err(Error::DegenerateSignPart { .. }) | Err(Error::ZeroField { .. }) => {
                    degenerate_trials += 1;
                }
                Err(e) => return Err(e),
            }
            eta *= opts.step.shrink;
        }
        match accepted {
            Some((next, proj)) => {
                current = next;
                projection = proj;
                iterations += 1;
                eta = (eta * opts.step.growth).min(opts.step.max_step);
            }
            None => {
                if kind == SolveKind::Nodal && degenerate_trials > opts.step.max_halvings {
                    return Err(Error::SignCollapse(
                        "every trial step lost a sign part; restart with a wider dipole initializer".into(),
                    ));
                }
                break SolveStatus::Stalled;
            }
        }
    };

    let report = build_report(
        problem,
        opts,
        kind,
        status,
        current,
        projection,
        initial_level,
        iterations,
        trace,
    )?;
    if report.converged {
        Ok(report)
    } else {
        let reason = match status {
            SolveStatus::MaxIterations => format!(
                "residual {:e} above {:e} after {} iterations",
                report.residual, opts.grad_tol, iterations
            ),
            _ => format!(
                "line search stalled after {} halvings at residual {:e}",
                opts.step.max_halvings, report.residual
            ),
        };
        Err(Error::NonConvergence {
            reason,
            best: Box::new(report),
        })
    }
}

fn relative_residual(problem: &Problem, it: &Iterate) -> f64 {
    let grad = problem.grad_from(&it.terms, &it.field);
    l2_norm(&grad) / l2_norm(&it.field).max(1.0)
}

#[allow(clippy::too_many_arguments)]
fn build_report(
    problem: &Problem,
    opts: &SolveOptions,
    kind: SolveKind,
    status: SolveStatus,
    current: Iterate,
    projection: ProjectionSummary,
    initial_level: f64,
    iterations: usize,
    trace: Vec<TraceRow>,
) -> Result<SolveReport> {
    let grad = problem.grad_from(&current.terms, &current.field);
    let residual = l2_norm(&grad) / l2_norm(&current.field).max(1.0);
    let q2 = problem.model().q.powi(2);
    let nehari_residual = current.terms.norm_sq + q2 * current.terms.coupling - problem.f_u_u(&current.field);
    let (component_norms, component_residuals, component_scales) = if kind == SolveKind::Nodal {
        let (plus, minus) = crate::nehari::sign_split(&current.field);
        let scale = |part: &ScalarField| -> Result<f64> { Ok(problem.norm_sq(part)? + problem.f_u_u(part)) };
        (
            Some((problem.norm_sq(&plus)?.sqrt(), problem.norm_sq(&minus)?.sqrt())),
            Some((grad.dot(&plus)?, grad.dot(&minus)?)),
            Some((scale(&plus)?, scale(&minus)?)),
        )
    } else {
        (None, None, None)
    };
    let grid = problem.grid();
    Ok(SolveReport {
        kind,
        status,
        converged: status == SolveStatus::Converged,
        grid: GridSummary {
            half_length: grid.half_length(),
            points_per_axis: grid.points_per_axis(),
        },
        model: *problem.model(),
        seed: opts.seed,
        energy: current.energy,
        level: current.energy.total,
        initial_level,
        residual,
        nehari_residual,
        iterations,
        projection,
        sign: SignSummary {
            min: current.field.min(),
            max: current.field.max(),
        },
        component_norms,
        component_residuals,
        component_scales,
        trace,
        field: Some(current.field),
    })
}
