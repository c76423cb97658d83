//! Discrete spherical averages on `Z^d`: lattice shells, exponential sums,
//! major-arc multipliers and `ℓ^p`-improving norm experiments.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod fft;
pub mod grid;
pub mod lattice;
pub mod multiplier;
pub mod norms;
pub mod number;
pub mod operators;
pub mod quadrature;
pub mod shell_cache;
pub mod special;
pub mod sums;

pub use error::{Error, Result};
pub use exec::Strategy;
pub use grid::{lp_norm, BoxSpec, GridFunction};
pub use lattice::{count_shell, enumerate_shell, DiagonalForm, SphereShell};
pub use operators::ArithmeticMeasure;
