//! Numerical laboratory for the Schrödinger-type operator
//! `A = (1+|x|^α)Δ - θ²|x|^β` on `ℝ^N`, discretized radially.
//!
//! The operator is self-adjoint in the weighted space `L²_μ` with
//! `dμ = (1+|x|^α)^{-1} dx`. The crate computes its spectrum, ground state
//! and heat kernel on a truncated radial grid, and verifies the quantitative
//! estimates that hold for it at desk scale: coefficient inequalities,
//! eigenfunction sandwich and decay bounds, on-diagonal and off-diagonal
//! kernel bounds, ultracontractivity, semigroup dissipativity and
//! Hille-Yosida-type resolvent bounds.

pub mod barrier;
pub mod config;
pub mod error;
pub mod evolve;
pub mod grid;
pub mod interp;
pub mod kernel;
pub mod matrix;
pub mod model;
pub mod quad;
pub mod report;
pub mod sphere;
pub mod spectral;
pub mod tridiag;
pub mod verify;

pub use error::{Error, Result};
pub use model::{Diffusion, OperatorParams, RegimeFlags};
