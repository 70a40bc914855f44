//! Command-line front end: `solve-ground`, `solve-nodal`, `verify`,
//! `kernel-info`.
//!
//! Every run writes into a fresh directory `<out>/<unix-time>-seed<seed>`
//! and prints one JSON summary line on stdout. Errors are printed as one JSON
//! line on stderr and mapped to exit codes: 2 non-convergence or sign
//! collapse, 3 configuration error, 4 failed invariant, 1 anything else.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::bp_field::kernel_energies;
use crate::config::{parse_config_with, RunConfig};
use crate::error::{Error, Result};
use crate::io::{write_field, write_json, write_trace};
use crate::minimize::{solve_ground, solve_nodal, SolveReport};
use crate::verify::{run_invariant_suite_with, SuiteOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_SOLVE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "sbp",
    version,
    about = "Ground and nodal states of the Schrödinger–Bopp–Podolsky system"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Parent directory of the run directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Permit q = 0 (local Schrödinger limit).
    #[arg(long, global = true)]
    pub allow_local: bool,
    /// Override of grid.N.
    #[arg(long, global = true)]
    pub grid_n: Option<usize>,
    #[arg(long, global = true)]
    pub max_iters: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimize J on the Nehari manifold.
    SolveGround,
    /// Minimize J on the nodal set.
    SolveNodal,
    /// Run the invariant suite.
    Verify {
        /// Override of solve.trials.
        #[arg(long)]
        trials: Option<usize>,
        /// Skip the ground and nodal solves.
        #[arg(long)]
        no_solves: bool,
    },
    /// Truncated Maxwell and Bopp–Podolsky kernel energies over a halving
    /// schedule of inner radii.
    KernelInfo {
        #[arg(long, default_value_t = 0.1)]
        eps_start: f64,
        #[arg(long, default_value_t = 14)]
        steps: usize,
        #[arg(long, default_value_t = 100.0)]
        r_max: f64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::SolveGround => "solve-ground",
            Command::SolveNodal => "solve-nodal",
            Command::Verify { .. } => "verify",
            Command::KernelInfo { .. } => "kernel-info",
        }
    }
}

/// Exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NonConvergence { .. } | Error::SignCollapse(_) | Error::DegenerateInitializer(_) => EXIT_SOLVE,
        Error::ConfigParse { .. } | Error::Validation { .. } => EXIT_CONFIG,
        _ => EXIT_OTHER,
    }
}

/// Single-line JSON description of an error.
pub fn error_line(err: &Error) -> String {
    json!({
        "error": err.kind(),
        "message": err.to_string(),
        "exit_code": exit_code(err),
    })
    .to_string()
}

pub fn load_config(common: &CommonArgs) -> Result<RunConfig> {
    let text = match &common.config {
        Some(path) => std::fs::read_to_string(path)?,
        None => String::new(),
    };
    let mut config = parse_config_with(&text, common.allow_local)?;
    if let Some(seed) = common.seed {
        config.solve.seed = seed;
    }
    if let Some(n) = common.grid_n {
        config.grid.points_per_axis = n;
    }
    if let Some(iters) = common.max_iters {
        config.solve.max_iters = iters;
    }
    if let Some(out) = &common.out {
        config.output.dir = out.clone();
    }
    config.validate()?;
    Ok(config)
}

fn run_dir(config: &RunConfig) -> Result<PathBuf> {
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let base = format!("{stamp}-seed{}", config.solve.seed);
    let mut dir = config.output.dir.join(&base);
    let mut k = 1;
    while dir.exists() {
        dir = config.output.dir.join(format!("{base}-{k}"));
        k += 1;
    }
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_solve(dir: &Path, report: &SolveReport) -> Result<()> {
    write_json(dir.join("report.json"), report)?;
    write_trace(dir.join("trace.csv"), &report.trace)?;
    if let Some(field) = &report.field {
        write_field(dir.join("field.sbpf"), field)?;
    }
    Ok(())
}

/// Runs a parsed command line and returns the exit status.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("{}", error_line(&err));
            exit_code(&err)
        }
    }
}

/// Parses `args` (including the program name) and runs them.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let config = load_config(&cli.common)?;
    let dir = run_dir(&config)?;
    write_json(dir.join("config.json"), &config)?;
    let grid = config.grid()?;
    let model = config.model_params()?;
    let command = cli.command.name();

    match &cli.command {
        Command::SolveGround | Command::SolveNodal => {
            let nodal = matches!(cli.command, Command::SolveNodal);
            let opts = config.solve_options(nodal);
            let outcome = if nodal {
                solve_nodal(&model, &grid, &opts)
            } else {
                solve_ground(&model, &grid, &opts)
            };
            match outcome {
                Ok(report) => {
                    write_solve(&dir, &report)?;
                    println!(
                        "{}",
                        json!({
                            "command": command,
                            "run_dir": dir,
                            "converged": true,
                            "level": report.level,
                            "residual": report.residual,
                            "iterations": report.iterations,
                        })
                    );
                    Ok(EXIT_OK)
                }
                Err(Error::NonConvergence { reason, best }) => {
                    write_solve(&dir, &best)?;
                    Err(Error::NonConvergence { reason, best })
                }
                Err(e) => Err(e),
            }
        }
        Command::Verify { trials, no_solves } => {
            let mut opts = SuiteOptions::new(trials.unwrap_or(config.solve.trials), config.solve.seed);
            opts.include_solves = config.solve.verify_solves && !no_solves;
            opts.solve = config.solve_options(false);
            let report = run_invariant_suite_with(&model, &grid, &opts)?;
            write_json(dir.join("verdict.json"), &report)?;
            println!(
                "{}",
                json!({
                    "command": command,
                    "run_dir": dir,
                    "all_pass": report.all_pass,
                    "failing": report.failing(),
                })
            );
            if report.all_pass {
                Ok(EXIT_OK)
            } else {
                eprintln!(
                    "{}",
                    json!({
                        "error": "invariant_failure",
                        "message": format!("failing invariants: {}", report.failing().join(", ")),
                        "exit_code": EXIT_VERIFY,
                    })
                );
                Ok(EXIT_VERIFY)
            }
        }
        Command::KernelInfo {
            eps_start,
            steps,
            r_max,
        } => {
            let mut csv = String::from("epsilon,maxwell_truncated,bp_truncated\n");
            let mut eps = *eps_start;
            for _ in 0..*steps {
                let e = kernel_energies(model.a, eps, *r_max)?;
                csv.push_str(&format!(
                    "{:e},{:e},{:e}\n",
                    e.epsilon, e.maxwell_truncated, e.bp_truncated
                ));
                eps *= 0.5;
            }
            let path = dir.join("kernel.csv");
            std::fs::write(&path, csv)?;
            println!("{}", json!({"command": command, "run_dir": dir, "rows": steps}));
            Ok(EXIT_OK)
        }
    }
}

/// Sizes the global worker pool from `SBP_THREADS` when set.
pub fn init_threads() {
    if let Some(n) = std::env::var("SBP_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::SignCollapse("x".into())), EXIT_SOLVE);
        assert_eq!(
            exit_code(&Error::Validation {
                key: "k".into(),
                constraint: "c".into()
            }),
            EXIT_CONFIG
        );
        assert_eq!(exit_code(&Error::GridMismatch), EXIT_OTHER);
    }

    #[test]
    fn error_line_is_single_line_json() {
        let line = error_line(&Error::ConfigParse {
            line: 3,
            message: "bad\nthing".into(),
        });
        assert!(!line.contains('\n'));
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["error"], "config_parse");
        assert_eq!(v["exit_code"], 3);
    }

    #[test]
    fn flags_parse() {
        let cli = Cli::try_parse_from(["sbp", "verify", "--trials", "3", "--seed", "9", "--grid-n", "16"]).unwrap();
        assert_eq!(cli.common.seed, Some(9));
        assert_eq!(cli.common.grid_n, Some(16));
        assert!(matches!(cli.command, Command::Verify { trials: Some(3), .. }));
    }
}
