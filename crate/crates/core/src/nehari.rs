//! Projections onto the Nehari manifold `𝒩 = {u ≠ 0 : ⟨J'(u), u⟩ = 0}` and
//! onto the nodal set `ℳ = {w : w± ≠ 0, ⟨J'(w), w±⟩ = 0}`.
//!
//! Along a ray `t ↦ tu` the fibering map `h_u(t) = J(tu)` only needs `‖u‖²`,
//! `∫φ_u u²` and a one-dimensional family of nonlinear integrals. Likewise,
//! because `w⁺` and `w⁻` have disjoint nodal supports, `φ_{tw⁺+sw⁻} =
//! t²φ_{w⁺} + s²φ_{w⁻}` and `f(tw⁺ + sw⁻) = f(tw⁺) + f(sw⁻)` node by node, so
//! the nodal map `(t, s) ↦ ξ(t, s)` reduces to a handful of scalars.
//!
//! The spectral kinetic form does not vanish between `w⁺` and `w⁻` on the
//! grid, so the reduced system keeps the cross term
//! `C = ∫(-Δw⁺) w⁻`. It is zero for the continuum form.

use serde::{Deserialize, Serialize};

use crate::energy::{FieldTerms, Problem};
use crate::error::{Error, Result};
use crate::grid::{self, ScalarField};
use crate::model::Nonlinearity;
use crate::roots::{bracket_decreasing, solve_decreasing};

/// Default relative tolerance of both projections.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Fields with `‖u‖` below this are treated as zero.
pub const ZERO_FIELD_NORM: f64 = 1e-12;
/// Sign parts with `‖w±‖` below this are degenerate.
pub const DEGENERATE_SIGN_NORM: f64 = 1e-10;
const MAX_EXPANSIONS: usize = 60;
const EXPANSION_FACTOR: f64 = 2.0;
const BISECT_WIDTH: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberingDiagnostics {
    pub t_star: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
    /// `(t, sign h'(t))` on a log grid around `t_star`; empty unless requested.
    pub sign_samples: Vec<(f64, i8)>,
}

/// Nonzero nodal values of a direction `v`, for the integrals of `f` and `F`
/// along `t ↦ tv`, `t > 0`. For the power model these are monomials in `t`
/// times the moment `∫|v|^p`.
#[derive(Debug, Clone)]
struct Profile {
    nonlinearity: Nonlinearity,
    support: Vec<f64>,
    h3: f64,
    power_moment: Option<(f64, f64)>,
}

impl Profile {
    fn new(nonlinearity: Nonlinearity, v: &ScalarField, h3: f64) -> Self {
        let support: Vec<f64> = v.values().iter().copied().filter(|x| *x != 0.0).collect();
        let power_moment = match nonlinearity {
            Nonlinearity::Power { p } => {
                let m = support.iter().map(|&x| nonlinearity.f(x) * x).sum::<f64>() * h3;
                Some((p, m))
            }
            Nonlinearity::LogPower => None,
        };
        Self {
            nonlinearity,
            support,
            h3,
            power_moment,
        }
    }

    fn sum<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        self.support.iter().map(|&x| g(x)).sum::<f64>() * self.h3
    }

    /// `∫F(tv)`.
    fn big_f(&self, t: f64) -> f64 {
        match self.power_moment {
            Some((p, m)) => t.abs().powf(p) * m / p,
            None => self.sum(|x| self.nonlinearity.big_f(t * x)),
        }
    }

    /// `∫f(tv) v`.
    fn f_v(&self, t: f64) -> f64 {
        match self.power_moment {
            Some((p, m)) => t.abs().powf(p - 2.0) * t * m,
            None => self.sum(|x| self.nonlinearity.f(t * x) * x),
        }
    }

    /// `∫|f(tv) v|`.
    fn abs_f_v(&self, t: f64) -> f64 {
        match self.power_moment {
            Some(_) => self.f_v(t).abs(),
            None => self.sum(|x| (self.nonlinearity.f(t * x) * x).abs()),
        }
    }

    /// `∫f'(tv) v²`.
    fn fprime_v2(&self, t: f64) -> f64 {
        match self.power_moment {
            Some((p, m)) => (p - 1.0) * t.abs().powf(p - 2.0) * m,
            None => self.sum(|x| self.nonlinearity.fprime_or_limit(t * x) * x * x),
        }
    }
}

/// The ray `t ↦ tu` with its quadratic and quartic coefficients cached.
#[derive(Debug, Clone)]
pub struct Fiber<'a> {
    q2: f64,
    profile: Profile,
    direction: &'a ScalarField,
    terms: FieldTerms,
}

impl<'a> Fiber<'a> {
    pub fn new(problem: &Problem, u: &'a ScalarField) -> Result<Self> {
        problem.check(u)?;
        let terms = problem.terms(u);
        Self::with_terms(problem, u, terms)
    }

    pub(crate) fn with_terms(problem: &Problem, u: &'a ScalarField, terms: FieldTerms) -> Result<Self> {
        let norm = terms.norm_sq.max(0.0).sqrt();
        if !(norm > ZERO_FIELD_NORM) {
            return Err(Error::ZeroField { norm });
        }
        let model = problem.model();
        Ok(Self {
            q2: model.q * model.q,
            profile: Profile::new(model.nonlinearity, u, problem.grid().cell_volume()),
            direction: u,
            terms,
        })
    }

    /// `‖u‖²`.
    pub fn norm_sq(&self) -> f64 {
        self.terms.norm_sq
    }

    /// `∫φ_u u²`.
    pub fn coupling(&self) -> f64 {
        self.terms.coupling
    }

    pub fn direction(&self) -> &ScalarField {
        self.direction
    }

    pub(crate) fn terms(&self) -> &FieldTerms {
        &self.terms
    }

    /// `∫F(tu)`.
    pub fn big_f_integral(&self, t: f64) -> f64 {
        self.profile.big_f(t)
    }

    /// `∫f(tu) u`.
    pub fn f_integral(&self, t: f64) -> f64 {
        self.profile.f_v(t)
    }

    fn abs_f_integral(&self, t: f64) -> f64 {
        self.profile.abs_f_v(t)
    }

    fn fprime_integral(&self, t: f64) -> f64 {
        self.profile.fprime_v2(t)
    }

    /// `h_u(t) = J(tu)`.
    pub fn h(&self, t: f64) -> f64 {
        0.5 * t * t * self.terms.norm_sq + 0.25 * self.q2 * t.powi(4) * self.terms.coupling - self.big_f_integral(t)
    }

    /// `h'_u(t) = t‖u‖² + q²t³∫φ_u u² − ∫f(tu)u`.
    pub fn dh(&self, t: f64) -> f64 {
        t * self.terms.norm_sq + self.q2 * t.powi(3) * self.terms.coupling - self.f_integral(t)
    }

    pub fn ddh(&self, t: f64) -> f64 {
        self.terms.norm_sq + 3.0 * self.q2 * t * t * self.terms.coupling - self.fprime_integral(t)
    }

    /// Scale against which `|h'(t)|` is measured.
    pub fn residual_scale(&self, t: f64) -> f64 {
        t * self.terms.norm_sq + self.q2 * t.powi(3) * self.terms.coupling + self.abs_f_integral(t)
    }

    /// Unique zero of `h'_u` on `(0, ∞)`.
    pub fn project(&self, tol: f64) -> Result<FiberingDiagnostics> {
        let (lo, hi, expansions) = bracket_decreasing(|t| self.dh(t), 1.0, EXPANSION_FACTOR, MAX_EXPANSIONS)?;
        let root = solve_decreasing(
            |t| self.dh(t),
            |t| self.ddh(t),
            lo,
            hi,
            BISECT_WIDTH,
            |t| 1e-3 * tol * self.residual_scale(t),
            200,
        );
        let scale = self.residual_scale(root.x);
        if !(root.value.abs() <= tol * scale) {
            return Err(Error::BracketFailure(format!(
                "projection stalled at t = {}, |h'| = {:e} > {:e}",
                root.x,
                root.value.abs(),
                tol * scale
            )));
        }
        Ok(FiberingDiagnostics {
            t_star: root.x,
            bracket: (lo, hi),
            iterations: expansions + root.iterations,
            sign_samples: Vec::new(),
        })
    }

    /// Signs of `h'` at `count` log-spaced points in `[t/spread, t·spread]`.
    pub fn sign_pattern(&self, t_star: f64, spread: f64, count: usize) -> Vec<(f64, i8)> {
        let (a, b) = ((t_star / spread).ln(), (t_star * spread).ln());
        (0..count)
            .map(|i| {
                let t = (a + (b - a) * i as f64 / (count - 1) as f64).exp();
                let d = self.dh(t);
                (
                    t,
                    if d > 0.0 {
                        1
                    } else if d < 0.0 {
                        -1
                    } else {
                        0
                    },
                )
            })
            .collect()
    }
}

/// Number of sign changes in a sampled sign sequence (zeros skipped).
pub fn sign_changes(pattern: &[(f64, i8)]) -> usize {
    let signs: Vec<i8> = pattern.iter().map(|p| p.1).filter(|s| *s != 0).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// `(h_u(t), h'_u(t))`.
pub fn fibering(problem: &Problem, u: &ScalarField, t: f64) -> Result<(f64, f64)> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "fibering parameter must be positive, got {t}"
        )));
    }
    let fiber = Fiber::new(problem, u)?;
    Ok((fiber.h(t), fiber.dh(t)))
}

#[derive(Debug, Clone)]
pub struct GroundProjection {
    pub t: f64,
    pub field: ScalarField,
    pub diagnostics: FiberingDiagnostics,
}

/// Scales `u` onto `𝒩`.
pub fn project_ground(problem: &Problem, u: &ScalarField, tol: f64) -> Result<GroundProjection> {
    let fiber = Fiber::new(problem, u)?;
    let diagnostics = fiber.project(tol)?;
    Ok(GroundProjection {
        t: diagnostics.t_star,
        field: u.scaled(diagnostics.t_star),
        diagnostics,
    })
}

/// `(w⁺, w⁻) = (max(w, 0), min(w, 0))` node by node.
pub fn sign_split(w: &ScalarField) -> (ScalarField, ScalarField) {
    (w.map(|v| v.max(0.0)), w.map(|v| v.min(0.0)))
}

/// Quadratic and quartic coefficients of the nodal system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodalCoefficients {
    /// `‖w⁺‖²`.
    pub a_plus: f64,
    /// `‖w⁻‖²`.
    pub a_minus: f64,
    /// `∫(-Δw⁺) w⁻` (the potential term vanishes exactly).
    pub cross_kinetic: f64,
    /// `∫φ_{w⁺}(w⁺)²`.
    pub b_pp: f64,
    /// `∫φ_{w⁻}(w⁻)²`.
    pub b_mm: f64,
    /// `∫φ_{w⁺}(w⁻)²`.
    pub b_pm: f64,
    /// `∫φ_{w⁻}(w⁺)²`.
    pub b_mp: f64,
}

impl NodalCoefficients {
    /// Symmetrized cross coupling.
    pub fn b_cross(&self) -> f64 {
        0.5 * (self.b_pm + self.b_mp)
    }
}

/// The reduced two-parameter system for a sign-changing direction `w`.
#[derive(Debug, Clone)]
pub struct NodalSystem {
    pub coeffs: NodalCoefficients,
    plus: ScalarField,
    minus: ScalarField,
    plus_profile: Profile,
    minus_profile: Profile,
    plus_terms: FieldTerms,
    minus_terms: FieldTerms,
    q2: f64,
}

impl NodalSystem {
    pub fn new(problem: &Problem, w: &ScalarField) -> Result<Self> {
        problem.check(w)?;
        let (plus, minus) = sign_split(w);
        let (np, nm) = (grid::l2_norm(&plus), grid::l2_norm(&minus));
        let plus_terms = problem.terms(&plus);
        let minus_terms = problem.terms(&minus);
        let (hp, hm) = (plus_terms.norm_sq.sqrt(), minus_terms.norm_sq.sqrt());
        if !(hp >= DEGENERATE_SIGN_NORM && hm >= DEGENERATE_SIGN_NORM) || np == 0.0 || nm == 0.0 {
            return Err(Error::DegenerateSignPart { plus: hp, minus: hm });
        }
        let coeffs = NodalCoefficients {
            a_plus: plus_terms.norm_sq,
            a_minus: minus_terms.norm_sq,
            cross_kinetic: plus_terms.neg_lap.dot_unchecked(&minus),
            b_pp: plus_terms.coupling,
            b_mm: minus_terms.coupling,
            b_pm: crate::bp_field::coupling(&minus, &plus_terms.phi)?,
            b_mp: crate::bp_field::coupling(&plus, &minus_terms.phi)?,
        };
        let model = problem.model();
        let h3 = problem.grid().cell_volume();
        Ok(Self {
            coeffs,
            plus_profile: Profile::new(model.nonlinearity, &plus, h3),
            minus_profile: Profile::new(model.nonlinearity, &minus, h3),
            plus,
            minus,
            plus_terms,
            minus_terms,
            q2: model.q * model.q,
        })
    }

    pub fn plus(&self) -> &ScalarField {
        &self.plus
    }

    pub fn minus(&self) -> &ScalarField {
        &self.minus
    }

    fn profile(&self, positive: bool) -> &Profile {
        if positive {
            &self.plus_profile
        } else {
            &self.minus_profile
        }
    }

    /// `∫f(τw±) τw±`.
    pub fn nonlinear(&self, positive: bool, tau: f64) -> f64 {
        tau * self.profile(positive).f_v(tau)
    }

    fn nonlinear_abs(&self, positive: bool, tau: f64) -> f64 {
        tau.abs() * self.profile(positive).abs_f_v(tau)
    }

    /// `d/dτ ∫f(τw±) τw±`.
    fn nonlinear_slope(&self, positive: bool, tau: f64) -> f64 {
        let p = self.profile(positive);
        tau * p.fprime_v2(tau) + p.f_v(tau)
    }

    /// `∫F(τw±)`.
    pub fn big_f(&self, positive: bool, tau: f64) -> f64 {
        self.profile(positive).big_f(tau)
    }

    /// Polynomial parts of `(ξ₁, ξ₂)`.
    fn polynomial(&self, t: f64, s: f64) -> (f64, f64) {
        let c = &self.coeffs;
        let bx = c.b_cross();
        let xi1 = t * t * c.a_plus + t * s * c.cross_kinetic + self.q2 * (t.powi(4) * c.b_pp + t * t * s * s * bx);
        let xi2 = s * s * c.a_minus + t * s * c.cross_kinetic + self.q2 * (s.powi(4) * c.b_mm + t * t * s * s * bx);
        (xi1, xi2)
    }

    /// `ξ(t, s) = (⟨J'(tw⁺+sw⁻), tw⁺⟩, ⟨J'(tw⁺+sw⁻), sw⁻⟩)`.
    pub fn xi(&self, t: f64, s: f64) -> (f64, f64) {
        let (p1, p2) = self.polynomial(t, s);
        (p1 - self.nonlinear(true, t), p2 - self.nonlinear(false, s))
    }

    /// Per-component magnitudes used to make `ξ` dimensionless.
    pub fn scale(&self, t: f64, s: f64) -> (f64, f64) {
        let c = &self.coeffs;
        let bx = c.b_cross();
        let s1 = t * t * c.a_plus
            + (t * s * c.cross_kinetic).abs()
            + self.q2 * (t.powi(4) * c.b_pp + t * t * s * s * bx)
            + self.nonlinear_abs(true, t);
        let s2 = s * s * c.a_minus
            + (t * s * c.cross_kinetic).abs()
            + self.q2 * (s.powi(4) * c.b_mm + t * t * s * s * bx)
            + self.nonlinear_abs(false, s);
        (s1, s2)
    }

    /// `max_i |ξ_i| / scale_i`.
    pub fn relative_residual(&self, t: f64, s: f64) -> f64 {
        let (x1, x2) = self.xi(t, s);
        let (s1, s2) = self.scale(t, s);
        (x1.abs() / s1).max(x2.abs() / s2)
    }

    fn jacobian(&self, t: f64, s: f64) -> [[f64; 2]; 2] {
        let c = &self.coeffs;
        let bx = c.b_cross();
        let q2 = self.q2;
        [
            [
                2.0 * t * c.a_plus + s * c.cross_kinetic + q2 * (4.0 * t.powi(3) * c.b_pp + 2.0 * t * s * s * bx)
                    - self.nonlinear_slope(true, t),
                t * c.cross_kinetic + 2.0 * q2 * t * t * s * bx,
            ],
            [
                s * c.cross_kinetic + 2.0 * q2 * t * s * s * bx,
                2.0 * s * c.a_minus + t * c.cross_kinetic + q2 * (4.0 * s.powi(3) * c.b_mm + 2.0 * t * t * s * bx)
                    - self.nonlinear_slope(false, s),
            ],
        ]
    }

    /// `J(tw⁺ + sw⁻)` from the reduced coefficients.
    pub fn energy(&self, t: f64, s: f64) -> f64 {
        let c = &self.coeffs;
        0.5 * (t * t * c.a_plus + 2.0 * t * s * c.cross_kinetic + s * s * c.a_minus)
            + 0.25 * self.q2 * (t.powi(4) * c.b_pp + 2.0 * t * t * s * s * c.b_cross() + s.powi(4) * c.b_mm)
            - self.big_f(true, t)
            - self.big_f(false, s)
    }

    pub fn field(&self, t: f64, s: f64) -> ScalarField {
        self.plus
            .zip_with(&self.minus, |p, m| t * p + s * m)
            .expect("sign parts share a grid")
    }

    /// Cached terms of `tw⁺ + sw⁻`, assembled from those of the sign parts.
    pub(crate) fn field_terms(&self, t: f64, s: f64) -> FieldTerms {
        let (p, m) = (&self.plus_terms, &self.minus_terms);
        let phi = p.phi.zip_with(&m.phi, |a, b| t * t * a + s * s * b).expect("same grid");
        let neg_lap = p.neg_lap.zip_with(&m.neg_lap, |a, b| t * a + s * b).expect("same grid");
        let c = &self.coeffs;
        FieldTerms {
            phi,
            neg_lap,
            norm_sq: t * t * c.a_plus + 2.0 * t * s * c.cross_kinetic + s * s * c.a_minus,
            coupling: t.powi(4) * c.b_pp + t * t * s * s * (c.b_pm + c.b_mp) + s.powi(4) * c.b_mm,
        }
    }

    /// Finds a box `[r, R]²` on whose faces `ξ` has the Miranda sign pattern:
    /// `ξ₁ > 0` at `t = r`, `ξ₁ < 0` at `t = R`, and likewise for `ξ₂` in `s`.
    pub fn miranda_box(&self) -> Result<(f64, f64)> {
        let diagonal = |tau: f64| self.xi(tau, tau);
        let mut r = 1.0;
        let mut steps = 0;
        while !{
            let (a, b) = diagonal(r);
            a > 0.0 && b > 0.0
        } {
            r /= EXPANSION_FACTOR;
            steps += 1;
            if steps > MAX_EXPANSIONS {
                return Err(Error::BracketFailure("no lower Miranda face found".into()));
            }
        }
        let mut big_r = 1.0;
        steps = 0;
        while !{
            let (a, b) = diagonal(big_r);
            a < 0.0 && b < 0.0
        } {
            big_r *= EXPANSION_FACTOR;
            steps += 1;
            if steps > MAX_EXPANSIONS {
                return Err(Error::BracketFailure("no upper Miranda face found".into()));
            }
        }
        for _ in 0..MAX_EXPANSIONS {
            if self.faces_have_miranda_signs(r, big_r) {
                return Ok((r, big_r));
            }
            r /= EXPANSION_FACTOR;
            big_r *= EXPANSION_FACTOR;
        }
        Err(Error::BracketFailure(
            "Miranda faces never reached the required signs".into(),
        ))
    }

    fn faces_have_miranda_signs(&self, r: f64, big_r: f64) -> bool {
        const FACE_SAMPLES: usize = 33;
        let (n_r_plus, n_big_plus) = (self.nonlinear(true, r), self.nonlinear(true, big_r));
        let (n_r_minus, n_big_minus) = (self.nonlinear(false, r), self.nonlinear(false, big_r));
        (0..FACE_SAMPLES).all(|i| {
            let other = r * (big_r / r).powf(i as f64 / (FACE_SAMPLES - 1) as f64);
            let low1 = self.polynomial(r, other).0 - n_r_plus;
            let high1 = self.polynomial(big_r, other).0 - n_big_plus;
            let low2 = self.polynomial(other, r).1 - n_r_minus;
            let high2 = self.polynomial(other, big_r).1 - n_big_minus;
            low1 > 0.0 && high1 < 0.0 && low2 > 0.0 && high2 < 0.0
        })
    }

    /// Solves `ξ(t, s) = 0` inside the Miranda box by damped Newton, with
    /// coordinate-wise bracketed solves as a fallback.
    pub fn solve(&self, tol: f64) -> Result<NodalRoot> {
        let (r, big_r) = self.miranda_box()?;
        let clamp = |x: f64| x.clamp(r, big_r);
        let (mut t, mut s) = (clamp(1.0), clamp(1.0));
        let mut merit = self.relative_residual(t, s);
        let mut iterations = 0;
        let mut fallback_sweeps = 0;
        const MAX_ITERS: usize = 200;
        // Newton drives the residual to round-off; stop once it no longer improves.
        let target = 1e-3 * tol;
        while iterations < MAX_ITERS && merit > target {
            iterations += 1;
            let (x1, x2) = self.xi(t, s);
            let jac = self.jacobian(t, s);
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            let mut accepted = false;
            if det.is_finite() && det != 0.0 {
                let dt = (jac[1][1] * x1 - jac[0][1] * x2) / det;
                let ds = (jac[0][0] * x2 - jac[1][0] * x1) / det;
                let mut lambda = 1.0;
                for _ in 0..30 {
                    let (nt, ns) = (t - lambda * dt, s - lambda * ds);
                    if nt > 0.0 && ns > 0.0 {
                        let m = self.relative_residual(nt, ns);
                        if m < merit {
                            t = nt;
                            s = ns;
                            merit = m;
                            accepted = true;
                            break;
                        }
                    }
                    lambda *= 0.5;
                }
            }
            if !accepted {
                if merit <= tol {
                    break;
                }
                fallback_sweeps += 1;
                t = self.solve_coordinate(true, s, r, big_r, tol);
                s = self.solve_coordinate(false, t, r, big_r, tol);
                let m = self.relative_residual(t, s);
                if !(m < merit) && merit <= tol {
                    break;
                }
                merit = m;
            }
        }
        if !(merit <= tol) {
            return Err(Error::BracketFailure(format!(
                "nodal projection stalled at (t, s) = ({t}, {s}) with residual {merit:e}"
            )));
        }
        Ok(NodalRoot {
            t,
            s,
            residual: merit,
            miranda_box: (r, big_r),
            iterations,
            fallback_sweeps,
        })
    }

    /// Root in one coordinate with the other held fixed.
    fn solve_coordinate(&self, first: bool, other: f64, r: f64, big_r: f64, tol: f64) -> f64 {
        let g = |x: f64| {
            if first {
                self.xi(x, other).0
            } else {
                self.xi(other, x).1
            }
        };
        let dg = |x: f64| {
            let j = if first {
                self.jacobian(x, other)
            } else {
                self.jacobian(other, x)
            };
            if first {
                j[0][0]
            } else {
                j[1][1]
            }
        };
        let scale = |x: f64| {
            let (a, b) = if first {
                self.scale(x, other)
            } else {
                self.scale(other, x)
            };
            if first {
                a
            } else {
                b
            }
        };
        let (mut lo, mut hi) = (r, big_r);
        while g(lo) <= 0.0 && lo > 1e-300 {
            lo /= EXPANSION_FACTOR;
        }
        while g(hi) >= 0.0 && hi < 1e300 {
            hi *= EXPANSION_FACTOR;
        }
        solve_decreasing(g, dg, lo, hi, BISECT_WIDTH, |x| 1e-3 * tol * scale(x), 200).x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodalRoot {
    pub t: f64,
    pub s: f64,
    pub residual: f64,
    pub miranda_box: (f64, f64),
    pub iterations: usize,
    pub fallback_sweeps: usize,
}

#[derive(Debug, Clone)]
pub struct NodalProjection {
    pub t: f64,
    pub s: f64,
    pub field: ScalarField,
    pub coeffs: NodalCoefficients,
    pub root: NodalRoot,
}

/// Rescales the sign parts of `w` onto `ℳ`.
pub fn project_nodal(problem: &Problem, w: &ScalarField, tol: f64) -> Result<NodalProjection> {
    let system = NodalSystem::new(problem, w)?;
    let root = system.solve(tol)?;
    Ok(NodalProjection {
        t: root.t,
        s: root.s,
        field: system.field(root.t, root.s),
        coeffs: system.coeffs,
        root,
    })
}

/// Lower bound on `‖v‖_∞` for every `v ∈ 𝒩` when the cross kinetic and
/// nonlocal terms are nonnegative: `‖v‖² ≤ ∫f(v)v` and `‖v‖² ≥ V₀‖v‖₂²`
/// force `f(s)/s ≥ V₀` somewhere on the range of `v`, and `f(s)/s` is
/// increasing.
pub fn sup_norm_floor(problem: &Problem) -> f64 {
    let f = problem.model().nonlinearity;
    let v0 = problem.model().potential.v0;
    let g = |s: f64| v0 - f.f(s) / s;
    match bracket_decreasing(g, 1.0, 2.0, 200) {
        Ok((lo, hi, _)) => solve_decreasing(g, |_| -1.0, lo, hi, 1e-14, |_| 0.0, 400).x,
        Err(_) => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::model::{ModelParams, Nonlinearity, Potential};
    use std::sync::Arc;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    fn problem(q: f64, nonlinearity: Nonlinearity) -> (Arc<crate::grid::Grid>, Problem) {
        let g = make_grid(6.0, 16).unwrap();
        let model = ModelParams::new(1.0, q, nonlinearity, Potential::default()).unwrap();
        let p = Problem::new(&g, model).unwrap();
        (g, p)
    }

    fn dipole(g: &Arc<crate::grid::Grid>) -> ScalarField {
        ScalarField::from_fn(g, |x, y, z| {
            let r2 = y * y + z * z;
            (-((x - 1.5).powi(2) + r2) / 2.0).exp() - 0.8 * (-((x + 1.5).powi(2) + r2) / 2.0).exp()
        })
    }

    #[test]
    fn ground_projection_lands_on_nehari() {
        let (g, p) = problem(1.0, Nonlinearity::power(5.0).unwrap());
        let u = ScalarField::from_fn(&g, |x, y, z| (-(x * x + y * y + z * z) / 2.0).exp());
        let proj = project_ground(&p, &u, DEFAULT_TOL).unwrap();
        let res = p.nehari_residual(&proj.field).unwrap();
        let scale = p.norm_sq(&proj.field).unwrap() + p.f_u_u(&proj.field);
        assert!(res.abs() <= 1e-10 * scale);
        let again = project_ground(&p, &proj.field, DEFAULT_TOL).unwrap();
        assert!((again.t - 1.0).abs() < 1e-8);
    }

    #[test]
    fn zero_field_is_rejected() {
        let (g, p) = problem(1.0, Nonlinearity::LogPower);
        assert!(matches!(
            project_ground(&p, &ScalarField::zeros(&g), DEFAULT_TOL),
            Err(Error::ZeroField { .. })
        ));
        assert!(fibering(&p, &ScalarField::zeros(&g), 1.0).is_err());
    }

    #[test]
    fn sign_split_is_exact() {
        let g = make_grid(4.0, 8).unwrap();
        let w = ScalarField::from_fn(&g, |x, y, z| x + 0.3 * y - z * z);
        let (plus, minus) = sign_split(&w);
        for ((p, m), v) in plus.values().iter().zip(minus.values()).zip(w.values()) {
            assert_eq!(p + m, *v);
            assert_eq!(p * m, 0.0);
        }
        let pos = w.map(f64::abs);
        assert_eq!(sign_split(&pos).1.max_abs(), 0.0);
    }

    #[test]
    fn reduced_nodal_system_matches_full_gradient() {
        let (g, p) = problem(1.0, Nonlinearity::power(5.0).unwrap());
        let w = dipole(&g);
        let sys = NodalSystem::new(&p, &w).unwrap();
        let (t, s) = (0.9, 1.3);
        let field = sys.field(t, s);
        let grad = p.evaluate_grad(&field).unwrap();
        let (xi1, xi2) = sys.xi(t, s);
        let full1 = grad.dot(&sys.plus().scaled(t)).unwrap();
        let full2 = grad.dot(&sys.minus().scaled(s)).unwrap();
        let (s1, s2) = sys.scale(t, s);
        assert!((xi1 - full1).abs() < 1e-12 * s1);
        assert!((xi2 - full2).abs() < 1e-12 * s2);
        assert!(rel(sys.energy(t, s), p.evaluate_j(&field).unwrap().total) < 1e-12);
        assert!(rel(sys.coeffs.b_pm, sys.coeffs.b_mp) < 1e-10);
    }

    #[test]
    fn nodal_projection_and_fixed_point() {
        let (g, p) = problem(1.0, Nonlinearity::LogPower);
        let w = dipole(&g);
        let proj = project_nodal(&p, &w, DEFAULT_TOL).unwrap();
        assert!(proj.root.residual <= DEFAULT_TOL);
        let again = project_nodal(&p, &proj.field, DEFAULT_TOL).unwrap();
        assert!((again.t - 1.0).abs() < 1e-8 && (again.s - 1.0).abs() < 1e-8);
    }

    #[test]
    fn degenerate_sign_part() {
        let (g, p) = problem(1.0, Nonlinearity::LogPower);
        let u = ScalarField::from_fn(&g, |x, y, z| (-(x * x + y * y + z * z)).exp());
        assert!(matches!(
            project_nodal(&p, &u, DEFAULT_TOL),
            Err(Error::DegenerateSignPart { .. })
        ));
    }

    #[test]
    fn sup_floor_for_power() {
        let (_, p) = problem(1.0, Nonlinearity::power(5.0).unwrap());
        // f(s)/s = s³ = V₀ = 1
        assert!((sup_norm_floor(&p) - 1.0).abs() < 1e-12);
    }
}
