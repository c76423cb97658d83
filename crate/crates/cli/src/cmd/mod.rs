pub mod avg;
pub mod mult;
pub mod norm;
pub mod report;
pub mod shell;
pub mod sums;

use arithsphere::DiagonalForm;
use clap::Args;
use serde::Serialize;

/// Failures detected by the CLI itself rather than by the library.
#[derive(Debug, thiserror::Error)]
pub enum CheckFailed {
    #[error("oracle mismatch: {0}")]
    Oracle(String),
    #[error("tolerance exceeded: {0}")]
    Tolerance(String),
}

pub fn kind_of(e: &anyhow::Error) -> &'static str {
    match e.downcast_ref::<CheckFailed>() {
        Some(CheckFailed::Oracle(_)) => "oracle_mismatch",
        Some(CheckFailed::Tolerance(_)) => "tolerance",
        None if e.downcast_ref::<std::io::Error>().is_some() => "io",
        None => "invalid_argument",
    }
}

#[derive(Args, Clone, Copy, Debug, Serialize)]
pub struct FormArgs {
    /// Number of variables.
    #[arg(long, default_value_t = 4)]
    pub d: usize,
    /// Degree of the diagonal form.
    #[arg(long, default_value_t = 2)]
    pub k: u32,
}

impl FormArgs {
    pub fn form(&self) -> arithsphere::Result<DiagonalForm> {
        DiagonalForm::new(self.d, self.k)
    }
}
