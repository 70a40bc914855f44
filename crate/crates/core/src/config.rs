//! Run configuration: a TOML document with `[grid]`, `[model]`, `[solve]`
//! and `[output]` sections. Unknown keys are rejected.
//!
//! ```toml
//! [grid]
//! L = 8.0
//! N = 32
//!
//! [model]
//! a = 1.0
//! q = 1.0
//! nonlinearity = "power"
//! p = 5.0
//! ```

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{make_grid_with, Grid, Stencil, MAX_POINTS, MIN_POINTS};
use crate::minimize::{Initializer, SolveOptions, StepPolicy};
use crate::model::{ModelParams, Nonlinearity, Potential};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    #[serde(rename = "L")]
    pub half_length: f64,
    #[serde(rename = "N")]
    pub points_per_axis: usize,
    pub stencil: Stencil,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            half_length: 8.0,
            points_per_axis: 32,
            stencil: Stencil::SecondOrder,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NonlinearityKind {
    Power,
    Logpower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PotentialConfig {
    pub v0: f64,
    pub omega: f64,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        let p = Potential::default();
        Self {
            v0: p.v0,
            omega: p.omega,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub a: f64,
    pub q: f64,
    pub nonlinearity: NonlinearityKind,
    /// Exponent of the power model; ignored for `logpower`.
    pub p: f64,
    pub potential: PotentialConfig,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            a: 1.0,
            q: 1.0,
            nonlinearity: NonlinearityKind::Power,
            p: 5.0,
            potential: PotentialConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitializerKind {
    Gaussian,
    Dipole,
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveConfig {
    pub max_iters: usize,
    pub grad_tol: f64,
    pub projection_tol: f64,
    pub seed: u64,
    /// Defaults to `gaussian` for ground solves and `dipole` for nodal solves.
    pub initializer: Option<InitializerKind>,
    /// Field dump used when `initializer = "file"`.
    pub init_file: Option<PathBuf>,
    pub precondition: bool,
    pub noise: f64,
    pub initial_step: f64,
    pub shrink: f64,
    pub sufficient_decrease: f64,
    /// Random fields per invariant in `verify`.
    pub trials: usize,
    /// Whether `verify` also runs the solve-based invariants.
    pub verify_solves: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        let opts = SolveOptions::default();
        Self {
            max_iters: opts.max_iters,
            grad_tol: opts.grad_tol,
            projection_tol: opts.projection_tol,
            seed: opts.seed,
            initializer: None,
            init_file: None,
            precondition: opts.precondition,
            noise: opts.noise,
            initial_step: opts.step.initial_step,
            shrink: opts.step.shrink,
            sufficient_decrease: opts.step.sufficient_decrease,
            trials: 100,
            verify_solves: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Parent of the per-run directories.
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("runs"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub model: ModelConfig,
    pub solve: SolveConfig,
    pub output: OutputConfig,
    /// Set from the command line, never from the document.
    #[serde(skip)]
    pub allow_local: bool,
}

fn invalid(key: &str, constraint: impl Into<String>) -> Error {
    Error::Validation {
        key: key.to_string(),
        constraint: constraint.into(),
    }
}

impl RunConfig {
    /// Checks every constraint; the first violation names its key.
    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if !(g.half_length.is_finite() && g.half_length > 0.0) {
            return Err(invalid("grid.L", "L must be positive"));
        }
        let n = g.points_per_axis;
        if !n.is_multiple_of(2) || !(MIN_POINTS..=MAX_POINTS).contains(&n) {
            return Err(invalid(
                "grid.N",
                format!("N must be even and lie in [{MIN_POINTS}, {MAX_POINTS}]"),
            ));
        }
        let m = &self.model;
        if !(m.a.is_finite() && m.a > 0.0) {
            return Err(invalid("model.a", "a must be positive"));
        }
        if !m.q.is_finite() {
            return Err(invalid("model.q", "q must be finite"));
        }
        if m.q == 0.0 && !self.allow_local {
            return Err(invalid(
                "model.q",
                "q ≠ 0 is required (q = 0 is the local Schrödinger limit; pass --allow-local)",
            ));
        }
        if m.nonlinearity == NonlinearityKind::Power && !(m.p > 4.0 && m.p < 6.0) {
            return Err(invalid("model.p", "p must lie in (4,6)"));
        }
        if !(m.potential.v0.is_finite() && m.potential.v0 > 0.0) {
            return Err(invalid("model.potential.v0", "v0 must be positive"));
        }
        if !(m.potential.omega.is_finite() && m.potential.omega >= 0.0) {
            return Err(invalid("model.potential.omega", "omega must be nonnegative"));
        }
        let s = &self.solve;
        if s.max_iters == 0 {
            return Err(invalid("solve.max_iters", "max_iters must be at least 1"));
        }
        for (key, value) in [
            ("solve.grad_tol", s.grad_tol),
            ("solve.projection_tol", s.projection_tol),
            ("solve.initial_step", s.initial_step),
            ("solve.sufficient_decrease", s.sufficient_decrease),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(invalid(key, "must be positive"));
            }
        }
        if !(s.shrink > 0.0 && s.shrink < 1.0) {
            return Err(invalid("solve.shrink", "shrink factor must lie in (0,1)"));
        }
        if !(s.sufficient_decrease < 1.0) {
            return Err(invalid("solve.sufficient_decrease", "must lie in (0,1)"));
        }
        if !(s.noise >= 0.0 && s.noise < 1.0) {
            return Err(invalid("solve.noise", "noise must lie in [0,1)"));
        }
        if s.trials == 0 {
            return Err(invalid("solve.trials", "trials must be at least 1"));
        }
        if s.initializer == Some(InitializerKind::File) && s.init_file.is_none() {
            return Err(invalid("solve.init_file", "required when initializer = \"file\""));
        }
        Ok(())
    }

    pub fn model_params(&self) -> Result<ModelParams> {
        let m = &self.model;
        let nonlinearity = match m.nonlinearity {
            NonlinearityKind::Power => Nonlinearity::power(m.p)?,
            NonlinearityKind::Logpower => Nonlinearity::log_power(),
        };
        let potential = Potential::harmonic(m.potential.v0, m.potential.omega)?;
        ModelParams::new(m.a, m.q, nonlinearity, potential)
    }

    pub fn grid(&self) -> Result<Arc<Grid>> {
        make_grid_with(self.grid.half_length, self.grid.points_per_axis, self.grid.stencil)
    }

    /// Solve options; `nodal` selects the default initializer.
    pub fn solve_options(&self, nodal: bool) -> SolveOptions {
        let s = &self.solve;
        let initializer = match s.initializer {
            Some(InitializerKind::Gaussian) => Initializer::Gaussian,
            Some(InitializerKind::Dipole) => Initializer::Dipole,
            Some(InitializerKind::File) => Initializer::File(s.init_file.clone().unwrap_or_default()),
            None if nodal => Initializer::Dipole,
            None => Initializer::Gaussian,
        };
        SolveOptions {
            max_iters: s.max_iters,
            grad_tol: s.grad_tol,
            step: StepPolicy {
                initial_step: s.initial_step,
                shrink: s.shrink,
                sufficient_decrease: s.sufficient_decrease,
                max_step: StepPolicy::default().max_step.max(s.initial_step),
                ..StepPolicy::default()
            },
            seed: s.seed,
            initializer,
            precondition: s.precondition,
            noise: s.noise,
            projection_tol: s.projection_tol,
        }
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses and validates a configuration document; `q = 0` is rejected.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_with(text, false)
}

pub fn parse_config_with(text: &str, allow_local: bool) -> Result<RunConfig> {
    let mut config: RunConfig = toml::from_str(text).map_err(|e| Error::ConfigParse {
        line: e.span().map_or(0, |s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    config.allow_local = allow_local;
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[grid]\nL = 8.0\nN = 32\n\n[model]\na = 1.0\nq = 1.0\nnonlinearity = \"power\"\np = 5.0\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.grid.points_per_axis, 32);
        assert_eq!(c.solve.max_iters, 5000);
        assert_eq!(c.solve.grad_tol, 1e-6);
        assert_eq!(c.model.potential.omega, 0.25);
        assert_eq!(c.model_params().unwrap(), ModelParams::baseline());
        assert_eq!(c.solve_options(true).initializer, Initializer::Dipole);
        assert_eq!(c.solve_options(false).initializer, Initializer::Gaussian);
    }

    #[test]
    fn empty_document_is_the_default() {
        assert_eq!(parse_config("").unwrap(), RunConfig::default());
    }

    #[test]
    fn exponent_outside_range() {
        let text = MINIMAL.replace("p = 5.0", "p = 6.5");
        match parse_config(&text).unwrap_err() {
            Error::Validation { key, constraint } => {
                assert_eq!(key, "model.p");
                assert!(constraint.contains("p must lie in (4,6)"));
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn zero_coupling_needs_flag() {
        let text = MINIMAL.replace("q = 1.0", "q = 0.0");
        match parse_config(&text).unwrap_err() {
            Error::Validation { key, constraint } => {
                assert_eq!(key, "model.q");
                assert!(constraint.contains("q ≠ 0"));
            }
            e => panic!("{e:?}"),
        }
        assert_eq!(parse_config_with(&text, true).unwrap().model.q, 0.0);
    }

    #[test]
    fn unknown_key_reports_its_line() {
        let text = MINIMAL.replace("a = 1.0", "a = 1.0\nbogus = 3");
        match parse_config(&text).unwrap_err() {
            Error::ConfigParse { line, message } => {
                assert_eq!(line, 7);
                assert!(message.contains("bogus"));
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn syntax_error_reports_its_line() {
        match parse_config("[grid]\nL = 8.0\nN = = 3\n").unwrap_err() {
            Error::ConfigParse { line, .. } => assert_eq!(line, 3),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn logpower_ignores_p() {
        let text = MINIMAL.replace("\"power\"\np = 5.0", "\"logpower\"");
        let c = parse_config(&text).unwrap();
        assert_eq!(c.model_params().unwrap().nonlinearity, Nonlinearity::LogPower);
    }

    #[test]
    fn file_initializer_needs_path() {
        let text = format!("{MINIMAL}\n[solve]\ninitializer = \"file\"\n");
        assert!(matches!(parse_config(&text), Err(Error::Validation { .. })));
    }
}
