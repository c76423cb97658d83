use std::io::Write;

use anyhow::{bail, Result};
use arithsphere::number::units;
use arithsphere::sums::{
    dual_identity_check, e, gauss_sum, kloosterman, ramanujan, weil_ratio_scan,
};
use clap::{Args, Subcommand};
use serde::Serialize;

use super::{CheckFailed, FormArgs};
use crate::context::{config_line, json_output, Context};
use crate::select::parse_ints;

#[derive(Args, Debug, Serialize)]
pub struct SumsArgs {
    #[command(subcommand)]
    op: SumsOp,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case", tag = "op")]
enum SumsOp {
    /// c_q(n), closed form and direct.
    Ramanujan {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        n: i64,
    },
    /// G(a,q;m) = q^{-d} Σ_b e((aF(b) + b·m)/q).
    Gauss {
        #[command(flatten)]
        form: FormArgs,
        #[arg(long)]
        a: i64,
        #[arg(long)]
        q: u64,
        /// Frequency, comma-separated.
        #[arg(long)]
        m: String,
    },
    /// K(q,λ;m) = Σ_a e(-aλ/q) G(a,q;m).
    Kloosterman {
        #[command(flatten)]
        form: FormArgs,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        lambda: i64,
        #[arg(long)]
        m: String,
    },
    /// |K(q,λ;m)| q^{(d-1)/2} / (q,λ)^{1/2} for q ≤ q_max, as CSV.
    WeilScan {
        #[command(flatten)]
        form: FormArgs,
        #[arg(long)]
        q_max: u64,
        #[arg(long)]
        lambda: i64,
        #[arg(long)]
        m: String,
    },
    /// |Σ_b G(a,q;b) e(-b·x/q) - e(aF(x)/q)|.
    DualCheck {
        #[command(flatten)]
        form: FormArgs,
        #[arg(long)]
        a: i64,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        x: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

#[derive(Serialize)]
struct ScalarSum {
    value: [f64; 2],
    abs: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    direct: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual: Option<f64>,
}

fn vector(s: &str, d: usize) -> Result<Vec<i64>> {
    let v = parse_ints(s)?;
    if v.len() != d {
        bail!("`{s}` has {} entries, expected d={d}", v.len());
    }
    Ok(v)
}

pub fn run(ctx: &Context, a: SumsArgs) -> Result<()> {
    let q = match &a.op {
        SumsOp::Ramanujan { q, .. }
        | SumsOp::Gauss { q, .. }
        | SumsOp::Kloosterman { q, .. }
        | SumsOp::DualCheck { q, .. } => *q,
        SumsOp::WeilScan { q_max, .. } => *q_max,
    };
    if q == 0 {
        bail!("the modulus must be positive");
    }
    let mut out = ctx.writer(false)?;
    match &a.op {
        SumsOp::Ramanujan { q, n } => {
            let value = ramanujan(*q, *n) as f64;
            let direct = units(*q)
                .into_iter()
                .map(|u| e(-((u as i128 * *n as i128).rem_euclid(*q as i128) as f64) / *q as f64))
                .fold(num_complex::Complex64::default(), |s, v| s + v);
            let r = ScalarSum {
                value: [value, 0.0],
                abs: value.abs(),
                direct: Some([direct.re, direct.im]),
                residual: Some((direct - value).norm()),
            };
            out.write_all(json_output(&a, &r)?.as_bytes())?;
        }
        SumsOp::Gauss {
            form,
            a: unit,
            q,
            m,
        } => {
            let g = gauss_sum(form.form()?, *unit, *q, &vector(m, form.d)?);
            let r = ScalarSum {
                value: [g.re, g.im],
                abs: g.norm(),
                direct: None,
                residual: None,
            };
            out.write_all(json_output(&a, &r)?.as_bytes())?;
        }
        SumsOp::Kloosterman { form, q, lambda, m } => {
            let k = kloosterman(form.form()?, *q, *lambda, &vector(m, form.d)?);
            let r = ScalarSum {
                value: [k.re, k.im],
                abs: k.norm(),
                direct: None,
                residual: None,
            };
            out.write_all(json_output(&a, &r)?.as_bytes())?;
        }
        SumsOp::WeilScan {
            form,
            q_max,
            lambda,
            m,
        } => {
            let scan = weil_ratio_scan(
                form.form()?,
                *q_max,
                *lambda,
                &vector(m, form.d)?,
                ctx.strategy,
            )?;
            writeln!(out, "{}", config_line(&a)?)?;
            out.write_all(scan.to_csv().as_bytes())?;
            writeln!(
                out,
                "# max_ratio={:e} growth_exponent={:e}",
                scan.max_ratio, scan.growth_exponent
            )?;
        }
        SumsOp::DualCheck {
            form,
            a: unit,
            q,
            x,
            tol,
        } => {
            let residual = dual_identity_check(form.form()?, *unit, *q, &vector(x, form.d)?)?;
            #[derive(Serialize)]
            struct Dual {
                residual: f64,
                pass: bool,
            }
            let pass = residual <= *tol;
            out.write_all(json_output(&a, &Dual { residual, pass })?.as_bytes())?;
            out.flush()?;
            if !pass {
                return Err(
                    CheckFailed::Tolerance(format!("residual {residual:e} > {tol:e}")).into(),
                );
            }
        }
    }
    out.flush()?;
    Ok(())
}
