use std::fs::File;
use std::io::{BufReader, Write};
use std::path::PathBuf;

use anyhow::{bail, Context as _, Result};
use arithsphere::grid::{read_grid, write_grid, GridFormat};
use arithsphere::operators::{average_fft, average_torus, average_with, maximal, Boundary, Path};
use clap::{Args, ValueEnum};
use serde::Serialize;

use crate::context::{config_line, Context};
use crate::select::parse_lambdas;

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Raw,
}

impl From<Format> for GridFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => GridFormat::Csv,
            Format::Raw => GridFormat::Raw,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PathArg {
    Auto,
    Sparse,
    Dense,
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryArg {
    /// Z^d: the output box is the input box enlarged by the shell radius.
    Free,
    /// Periodic on the input box.
    Torus,
}

#[derive(Args, Debug, Serialize)]
pub struct AvgArgs {
    /// Input grid (`grid d=.. M=.. offset=..` header, then values).
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output format (defaults to the input format).
    #[arg(long, value_enum)]
    output_format: Option<Format>,
    /// Degree of the form; d is read from the grid.
    #[arg(long, default_value_t = 2)]
    k: u32,
    /// λ, or the λ set of the maximal operator.
    #[arg(long)]
    lambda: String,
    /// Take the pointwise sup over the selected λ.
    #[arg(long)]
    maximal: bool,
    #[arg(long, value_enum, default_value_t = PathArg::Auto)]
    path: PathArg,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Free)]
    boundary: BoundaryArg,
}

pub fn run(ctx: &Context, a: AvgArgs) -> Result<()> {
    let file =
        File::open(&a.input).with_context(|| format!("cannot open {}", a.input.display()))?;
    let f = read_grid(BufReader::new(file), a.format.into())?;
    let form = arithsphere::DiagonalForm::new(f.dim(), a.k)?;
    let lambdas = parse_lambdas(&a.lambda)?;
    let result = if a.maximal {
        if !matches!(a.boundary, BoundaryArg::Free) {
            bail!("--maximal works on Z^d only (--boundary free)");
        }
        let measures = lambdas
            .iter()
            .map(|&l| ctx.measure(form, l))
            .collect::<arithsphere::Result<Vec<_>>>()?;
        maximal(&f, &measures, ctx.strategy, ctx.budget)?
    } else {
        let [lambda] = lambdas[..] else {
            bail!(
                "a single lambda is required without --maximal, got {}",
                lambdas.len()
            );
        };
        let mu = ctx.measure(form, lambda)?;
        match (a.boundary, a.path) {
            (BoundaryArg::Free, PathArg::Auto) => {
                average_with(&f, &mu, Path::Auto, ctx.strategy, ctx.budget)?
            }
            (BoundaryArg::Free, PathArg::Sparse) => {
                average_with(&f, &mu, Path::Sparse, ctx.strategy, ctx.budget)?
            }
            (BoundaryArg::Free, PathArg::Dense) => {
                average_with(&f, &mu, Path::Dense, ctx.strategy, ctx.budget)?
            }
            (BoundaryArg::Torus, PathArg::Dense) => {
                let side = f.side();
                average_fft(&f, &mu, side, Boundary::Torus, ctx.strategy, ctx.budget)?
            }
            (BoundaryArg::Torus, _) => average_torus(&f, &mu, ctx.strategy)?,
        }
    };
    let mut out = ctx.writer(false)?;
    writeln!(out, "{}", config_line(&a)?)?;
    write_grid(
        &result,
        a.output_format.unwrap_or(a.format).into(),
        &mut out,
    )?;
    out.flush()?;
    Ok(())
}
