//! Ground states and least-energy nodal solutions of the
//! Schrödinger–Bopp–Podolsky system
//!
//! ```text
//! -Δu + V(x)u + q²φu = f(u),    -Δφ + a²Δ²φ = 4πu²    in ℝ³
//! ```
//!
//! on a truncated periodic box, by projected gradient descent on the Nehari
//! manifold and on the nodal set.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bp_field;
pub mod cli;
pub mod config;
pub mod energy;
pub mod error;
mod fft;
pub mod grid;
pub mod io;
pub mod minimize;
pub mod model;
pub mod nehari;
pub mod quadrature;
pub mod roots;
pub mod sampling;
pub mod verify;

pub use error::{Error, Result};
