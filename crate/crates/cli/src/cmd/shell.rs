use std::io::Write;

use anyhow::{bail, Result};
use arithsphere::enumerate_shell;
use arithsphere::lattice::{count_shell, regular_values};
use arithsphere::number::jacobi_r4;
use arithsphere::shell_cache::{store_shell, write_shell};
use clap::{Args, ValueEnum};
use serde::Serialize;

use super::{CheckFailed, FormArgs};
use crate::context::{config_line, Context};
use crate::select::parse_lambdas;

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ShellMode {
    /// Count, checked against the Jacobi formula (d=4, k=2) or enumeration.
    Count,
    /// Write the points in the cache format.
    Enumerate,
    /// List every represented λ up to `--lambda-max`.
    Regular,
}

#[derive(Args, Debug, Serialize)]
pub struct ShellArgs {
    #[command(flatten)]
    form: FormArgs,
    /// λ selection, e.g. `25`, `1,5,9`, `odd:49..401`, `dyadic:6`.
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long, value_enum, default_value_t = ShellMode::Count)]
    mode: ShellMode,
    /// Upper end for `--mode regular`.
    #[arg(long)]
    lambda_max: Option<u64>,
}

pub fn run(ctx: &Context, a: ShellArgs) -> Result<()> {
    let form = a.form.form()?;
    let lambdas = || -> Result<Vec<u64>> {
        match &a.lambda {
            Some(s) => parse_lambdas(s),
            None => bail!("--lambda is required for --mode {:?}", a.mode),
        }
    };
    match a.mode {
        ShellMode::Count => {
            let lambdas = lambdas()?;
            let mut out = ctx.writer(false)?;
            writeln!(out, "{}", config_line(&a)?)?;
            writeln!(out, "lambda,count,oracle,oracle_kind,match")?;
            let mut bad = Vec::new();
            for lambda in lambdas {
                let count = count_shell(form, lambda)?;
                let (oracle, kind) = if form.dimension() == 4 && form.is_sphere() {
                    (jacobi_r4(lambda), "jacobi")
                } else {
                    let shell = enumerate_shell(form, lambda, ctx.max_points)?;
                    (shell.count(), "enumeration")
                };
                writeln!(out, "{lambda},{count},{oracle},{kind},{}", count == oracle)?;
                if count != oracle {
                    bad.push(lambda);
                }
            }
            out.flush()?;
            if !bad.is_empty() {
                return Err(CheckFailed::Oracle(format!(
                    "count differs from the oracle at lambda {bad:?}"
                ))
                .into());
            }
        }
        ShellMode::Enumerate => {
            let lambdas = lambdas()?;
            let mut out = ctx.writer(false)?;
            if lambdas.len() == 1 {
                let shell = ctx.shell(form, lambdas[0])?;
                write_shell(&shell, &mut out)?;
            } else {
                let Some(dir) = &ctx.cache else {
                    bail!("enumerating several lambda needs a cache directory (--cache or ARITHSPHERE_CACHE)");
                };
                writeln!(out, "{}", config_line(&a)?)?;
                writeln!(out, "lambda,count,file")?;
                for lambda in lambdas {
                    let shell = enumerate_shell(form, lambda, ctx.max_points)?;
                    let path = store_shell(dir, &shell)?;
                    let name = path
                        .file_name()
                        .map(|n| n.to_string_lossy().into_owned())
                        .unwrap_or_default();
                    writeln!(out, "{lambda},{},{name}", shell.count())?;
                }
            }
            out.flush()?;
        }
        ShellMode::Regular => {
            let Some(max) = a.lambda_max else {
                bail!("--lambda-max is required for --mode regular");
            };
            let mut out = ctx.writer(false)?;
            writeln!(out, "{}", config_line(&a)?)?;
            writeln!(out, "lambda,count,within_bound")?;
            for r in regular_values(form, max)? {
                let b = r
                    .within_bound
                    .map_or("", |b| if b { "true" } else { "false" });
                writeln!(out, "{},{},{b}", r.lambda, r.count)?;
            }
            out.flush()?;
        }
    }
    Ok(())
}
