//! Model nonlinearities `f`, their antiderivatives `F`, the confining
//! potential `V`, and pointwise checks of the structural hypotheses on `f`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField};
use std::sync::Arc;

/// Autonomous nonlinearity `f(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Nonlinearity {
    /// `f(t) = |t|^{p-2} t`.
    Power { p: f64 },
    /// `f(t) = |t|² t ln(1 + |t|)`.
    LogPower,
}

impl Nonlinearity {
    /// Power model. Any `p > 2` is accepted so that deliberately broken
    /// models (e.g. `p = 3.5`) can be exercised; run configurations restrict
    /// `p` to `(4, 6)`.
    pub fn power(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 2.0) {
            return Err(Error::InvalidParameter(format!(
                "power exponent must exceed 2, got {p}"
            )));
        }
        Ok(Nonlinearity::Power { p })
    }

    pub fn log_power() -> Self {
        Nonlinearity::LogPower
    }

    pub fn f(&self, t: f64) -> f64 {
        match *self {
            Nonlinearity::Power { p } => {
                if t == 0.0 {
                    0.0
                } else {
                    pow(t.abs(), p - 2.0) * t
                }
            }
            Nonlinearity::LogPower => t * t * t * t.abs().ln_1p(),
        }
    }

    /// `F(t) = ∫_0^t f`.
    pub fn big_f(&self, t: f64) -> f64 {
        let s = t.abs();
        match *self {
            Nonlinearity::Power { p } => {
                if s == 0.0 {
                    0.0
                } else {
                    pow(s, p) / p
                }
            }
            Nonlinearity::LogPower => log_power_antiderivative(s),
        }
    }

    /// `f'(t)` for `t ≠ 0`.
    pub fn fprime(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Err(Error::UndefinedAtZero);
        }
        Ok(self.fprime_or_limit(t))
    }

    /// `f'(t)`, with the limit value `0` at `t = 0` (both models are
    /// superquadratic).
    pub(crate) fn fprime_or_limit(&self, t: f64) -> f64 {
        let s = t.abs();
        if s == 0.0 {
            return 0.0;
        }
        match *self {
            Nonlinearity::Power { p } => (p - 1.0) * pow(s, p - 2.0),
            Nonlinearity::LogPower => 3.0 * s * s * s.ln_1p() + s * s * s / (1.0 + s),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Nonlinearity::Power { .. } => "power",
            Nonlinearity::LogPower => "logpower",
        }
    }
}

/// `s^e`, through `powi` for small integer exponents.
fn pow(s: f64, e: f64) -> f64 {
    if e.fract() == 0.0 && e.abs() <= 32.0 {
        s.powi(e as i32)
    } else {
        s.powf(e)
    }
}

/// `∫_0^s σ³ ln(1+σ) dσ` for `s ≥ 0`.
///
/// Integration by parts gives
/// `((s⁴ - 1)/4) ln(1+s) - s⁴/16 + s³/12 - s²/8 + s/4`, which cancels badly
/// for small `s`; there the series `Σ_k (-1)^{k+1} s^{k+4} / (k (k+4))` is used.
fn log_power_antiderivative(s: f64) -> f64 {
    if s < 0.5 {
        let mut sum = 0.0;
        let mut power = s.powi(5);
        for k in 1..200 {
            let kf = k as f64;
            let term = power / (kf * (kf + 4.0));
            if k % 2 == 1 {
                sum += term;
            } else {
                sum -= term;
            }
            if term < 1e-18 * sum.abs() {
                break;
            }
            power *= s;
        }
        sum
    } else {
        let s2 = s * s;
        let s4 = s2 * s2;
        0.25 * (s4 - 1.0) * s.ln_1p() - s4 / 16.0 + s2 * s / 12.0 - s2 / 8.0 + s / 4.0
    }
}

/// Confining potential `V(x) = V₀ + ω|x|²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    pub v0: f64,
    pub omega: f64,
}

impl Default for Potential {
    fn default() -> Self {
        Self { v0: 1.0, omega: 0.25 }
    }
}

impl Potential {
    pub fn harmonic(v0: f64, omega: f64) -> Result<Self> {
        if !(v0.is_finite() && v0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "potential base V0 must be positive, got {v0}"
            )));
        }
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "potential stiffness omega must be nonnegative, got {omega}"
            )));
        }
        Ok(Self { v0, omega })
    }

    pub fn value(&self, x: f64, y: f64, z: f64) -> f64 {
        self.v0 + self.omega * (x * x + y * y + z * z)
    }

    pub fn sample(&self, grid: &Arc<Grid>) -> ScalarField {
        ScalarField::from_fn(grid, |x, y, z| self.value(x, y, z))
    }
}

/// Everything that defines the functional apart from the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Bopp–Podolsky length.
    pub a: f64,
    /// Coupling constant.
    pub q: f64,
    pub nonlinearity: Nonlinearity,
    pub potential: Potential,
}

impl ModelParams {
    pub fn new(a: f64, q: f64, nonlinearity: Nonlinearity, potential: Potential) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Bopp-Podolsky parameter a must be positive, got {a}"
            )));
        }
        if !q.is_finite() {
            return Err(Error::InvalidParameter(format!("coupling q must be finite, got {q}")));
        }
        Ok(Self {
            a,
            q,
            nonlinearity,
            potential,
        })
    }

    /// `p = 5`, `q = 1`, `a = 1`, `V = 1 + |x|²/4`.
    pub fn baseline() -> Self {
        Self {
            a: 1.0,
            q: 1.0,
            nonlinearity: Nonlinearity::Power { p: 5.0 },
            potential: Potential::default(),
        }
    }

    pub fn with_q(mut self, q: f64) -> Self {
        self.q = q;
        self
    }

    pub fn with_nonlinearity(mut self, nonlinearity: Nonlinearity) -> Self {
        self.nonlinearity = nonlinearity;
        self
    }
}

/// Nodewise `f(u)`.
pub fn apply_f(m: &Nonlinearity, u: &ScalarField) -> ScalarField {
    u.map(|v| m.f(v))
}

/// Nodewise `F(u)`.
pub fn apply_big_f(m: &Nonlinearity, u: &ScalarField) -> ScalarField {
    u.map(|v| m.big_f(v))
}

/// Outcome of one pointwise hypothesis check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub id: String,
    pub description: String,
    pub pass: bool,
    /// Worst observed value of the check's margin (negative means violated).
    pub worst_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub model: String,
    pub checks: Vec<HypothesisCheck>,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, id: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.id.as_str()).collect()
    }
}

/// Log-log slope at the small or large end of the samples must exceed this
/// in absolute value for a power-law limit to count as established.
const SLOPE_MARGIN: f64 = 0.1;
const REL_SLACK: f64 = 1e-12;

/// Log-spaced samples `10^lo ..= 10^hi`, `per_decade` points per decade.
pub fn log_samples(lo: i32, hi: i32, per_decade: usize) -> Vec<f64> {
    let count = (hi - lo) as usize * per_decade;
    (0..=count)
        .map(|i| 10f64.powf(lo as f64 + i as f64 / per_decade as f64))
        .collect()
}

/// Checks the growth and monotonicity hypotheses on positive sorted samples
/// spanning at least four decades.
///
/// Ids: `f1` (`f(t)/t → 0` at the small end), `f2` (`f(t)/t⁵` decreasing
/// toward 0 at the large end), `f3` (`F(t)/t⁴` increasing at the large end),
/// `f4` (`0 < 3f(t)t ≤ f'(t)t²`), `f_over_t3_monotone` (`f(t)/t³`
/// nondecreasing), `ft_minus_4F_monotone` (`f(t)t − 4F(t)` nondecreasing),
/// `F_nonnegative`.
pub fn check_hypotheses(m: &Nonlinearity, samples: &[f64]) -> Result<HypothesisReport> {
    if samples.len() < 8 {
        return Err(Error::InvalidParameter("need at least 8 samples".into()));
    }
    if samples.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidParameter("samples must be positive and finite".into()));
    }
    if samples.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("samples must be strictly increasing".into()));
    }
    let (t_min, t_max) = (samples[0], samples[samples.len() - 1]);
    if (t_max / t_min).log10() < 4.0 - 1e-9 {
        return Err(Error::InvalidParameter(
            "samples must span at least four decades".into(),
        ));
    }

    let low: Vec<f64> = samples.iter().copied().filter(|&t| t <= 10.0 * t_min).collect();
    let high: Vec<f64> = samples.iter().copied().filter(|&t| t >= t_max / 10.0).collect();
    let mut checks = Vec::new();

    // (f1): f(t)/t increasing in t on the lowest decade, with a positive
    // log-log slope, so it decays to zero as t -> 0.
    {
        let ratio = |t: f64| m.f(t) / t;
        let monotone = worst_step(&low, ratio, 1.0);
        let slope = log_slope(&low, ratio);
        checks.push(HypothesisCheck {
            id: "f1".into(),
            description: "f(t)/t -> 0 as t -> 0".into(),
            pass: monotone >= 0.0 && slope >= SLOPE_MARGIN,
            worst_margin: monotone.min(slope - SLOPE_MARGIN),
        });
    }
    // (f2): f(t)/t^5 decreasing on the top decade with negative slope.
    {
        let ratio = |t: f64| m.f(t) / t.powi(5);
        let monotone = worst_step(&high, ratio, -1.0);
        let slope = log_slope(&high, ratio);
        checks.push(HypothesisCheck {
            id: "f2".into(),
            description: "f(t)/t^5 -> 0 as t -> inf".into(),
            pass: monotone >= 0.0 && slope <= -SLOPE_MARGIN,
            worst_margin: monotone.min(-SLOPE_MARGIN - slope),
        });
    }
    // (f3): F(t)/t^4 strictly increasing on the top decade.
    {
        let ratio = |t: f64| m.big_f(t) / t.powi(4);
        let worst = high
            .windows(2)
            .map(|w| (ratio(w[1]) - ratio(w[0])) / ratio(w[0]).abs().max(f64::MIN_POSITIVE))
            .fold(f64::INFINITY, f64::min);
        checks.push(HypothesisCheck {
            id: "f3".into(),
            description: "F(t)/t^4 -> +inf as t -> inf".into(),
            pass: worst > 0.0,
            worst_margin: worst,
        });
    }
    // (f4): 0 < 3 f(t) t <= f'(t) t^2.
    {
        let mut worst = f64::INFINITY;
        let mut positive = true;
        for &t in samples {
            let lhs = 3.0 * m.f(t) * t;
            let rhs = m.fprime_or_limit(t) * t * t;
            positive &= lhs > 0.0;
            worst = worst.min((rhs - lhs) / lhs.abs().max(f64::MIN_POSITIVE) + REL_SLACK);
        }
        checks.push(HypothesisCheck {
            id: "f4".into(),
            description: "0 < 3 f(t) t <= f'(t) t^2".into(),
            pass: positive && worst >= 0.0,
            worst_margin: worst,
        });
    }
    {
        let worst = worst_step(samples, |t| m.f(t) / t.powi(3), 1.0);
        checks.push(HypothesisCheck {
            id: "f_over_t3_monotone".into(),
            description: "f(t)/t^3 nondecreasing for t > 0".into(),
            pass: worst >= 0.0,
            worst_margin: worst,
        });
    }
    {
        let worst = worst_step(samples, |t| m.f(t) * t - 4.0 * m.big_f(t), 1.0);
        checks.push(HypothesisCheck {
            id: "ft_minus_4F_monotone".into(),
            description: "f(t) t - 4 F(t) nondecreasing for t > 0".into(),
            pass: worst >= 0.0,
            worst_margin: worst,
        });
    }
    {
        let worst = samples
            .iter()
            .flat_map(|&t| [m.big_f(t), m.big_f(-t)])
            .fold(f64::INFINITY, f64::min);
        checks.push(HypothesisCheck {
            id: "F_nonnegative".into(),
            description: "F(t) >= 0".into(),
            pass: worst >= 0.0,
            worst_margin: worst,
        });
    }

    Ok(HypothesisReport {
        model: m.name().into(),
        checks,
    })
}

/// Smallest relative step `direction · (g(t_{i+1}) − g(t_i)) / |g(t_i)|`,
/// with a small slack for round-off; negative means monotonicity fails.
fn worst_step<G: Fn(f64) -> f64>(ts: &[f64], g: G, direction: f64) -> f64 {
    ts.windows(2)
        .map(|w| {
            let (a, b) = (g(w[0]), g(w[1]));
            let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
            direction * (b - a) / scale + REL_SLACK
        })
        .fold(f64::INFINITY, f64::min)
}

/// Least-squares-free log-log slope between the end points.
fn log_slope<G: Fn(f64) -> f64>(ts: &[f64], g: G) -> f64 {
    let (a, b) = (ts[0], ts[ts.len() - 1]);
    (g(b).abs().ln() - g(a).abs().ln()) / (b.ln() - a.ln())
}
