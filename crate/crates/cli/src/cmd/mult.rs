use std::io::Write;

use anyhow::{bail, Context as _, Result};
use arithsphere::multiplier::{
    error_multiplier_scan, kernel_identity_check, ErrorMultiplier, ErrorScanReport, KernelConfig,
    MainTerm, Normalization, ScanConfig,
};
use arithsphere::norms::fit::least_squares;
use clap::{ArgGroup, Args, ValueEnum};
use serde::Serialize;

use super::{CheckFailed, FormArgs};
use crate::context::{json_output, Context};
use crate::select::{parse_ints, parse_lambdas, parse_reals};

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizationArg {
    Unit,
    ShellCount,
}

impl From<NormalizationArg> for Normalization {
    fn from(n: NormalizationArg) -> Self {
        match n {
            NormalizationArg::Unit => Normalization::Unit,
            NormalizationArg::ShellCount => Normalization::ShellCount,
        }
    }
}

#[derive(Args, Debug, Serialize)]
#[command(group(ArgGroup::new("mode").required(true).args(["eval", "scan", "kernel_check", "split"])))]
pub struct MultArgs {
    /// Evaluate the main term, σ̂ and their difference at `--xi`.
    #[arg(long)]
    eval: bool,
    /// Sup-norm scan of the error multiplier for each selected λ.
    #[arg(long)]
    scan: bool,
    /// Check the kernel identity at `(a, q, λ, x)`.
    #[arg(long)]
    kernel_check: bool,
    /// Low/high split of the `q ∈ [2^j, 2^{j+1})` block at `--xi`.
    #[arg(long)]
    split: bool,

    #[command(flatten)]
    form: FormArgs,
    /// λ (a selection for `--scan`).
    #[arg(long)]
    lambda: String,
    /// Frequency, comma-separated.
    #[arg(long)]
    xi: Option<String>,
    #[arg(long)]
    q: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    a: Option<i64>,
    /// Lattice point, comma-separated.
    #[arg(long, allow_negative_numbers = true)]
    x: Option<String>,
    #[arg(long)]
    j: Option<u32>,
    #[arg(long)]
    delta: Option<f64>,
    /// Largest kernel-identity residual accepted.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = NormalizationArg::ShellCount)]
    normalization: NormalizationArg,

    #[arg(long, default_value_t = ScanConfig::default().random_samples)]
    random_samples: usize,
    #[arg(long, default_value_t = ScanConfig::default().rational_samples)]
    rational_samples: usize,
    #[arg(long, default_value_t = ScanConfig::default().refine_candidates)]
    refine_candidates: usize,
    #[arg(long, default_value_t = ScanConfig::default().refine_rounds)]
    refine_rounds: usize,
    #[arg(long, default_value_t = ScanConfig::default().seed)]
    seed: u64,
    /// Evaluation budget per λ.
    #[arg(long, default_value_t = ScanConfig::default().max_samples)]
    max_samples: usize,

    #[arg(long, default_value_t = KernelConfig::default().arc_nodes)]
    arc_nodes: usize,
    #[arg(long, default_value_t = KernelConfig::default().sphere_nodes)]
    sphere_nodes: usize,
    #[arg(long, default_value_t = KernelConfig::default().max_nodes)]
    max_nodes: usize,
    #[arg(long, default_value_t = KernelConfig::default().self_tol)]
    self_tol: f64,
}

#[derive(Serialize)]
struct EvalOut {
    lambda: u64,
    xi: Vec<f64>,
    main: [f64; 2],
    exact: f64,
    error: f64,
}

#[derive(Serialize)]
struct SplitOut {
    lambda: u64,
    j: u32,
    delta: f64,
    xi: Vec<f64>,
    low: [f64; 2],
    high: [f64; 2],
}

#[derive(Serialize)]
struct ScanFit {
    slope: f64,
    intercept: f64,
    residual: f64,
    /// `-(d-3)/4`.
    predicted: f64,
}

#[derive(Serialize)]
struct ScanOut {
    reports: Vec<ErrorScanReport>,
    fit: Option<ScanFit>,
}

#[derive(Serialize)]
struct KernelOut {
    lhs: [f64; 2],
    rhs: [f64; 2],
    residual: f64,
    arc_nodes: usize,
    sphere_nodes: usize,
    tol: f64,
    pass: bool,
}

fn single(s: &str) -> Result<u64> {
    match parse_lambdas(s)?[..] {
        [l] => Ok(l),
        ref v => bail!("a single lambda is required, got {}", v.len()),
    }
}

fn frequency(a: &MultArgs, d: usize) -> Result<Vec<f64>> {
    let xi = parse_reals(a.xi.as_deref().context("--xi is required")?)?;
    if xi.len() != d {
        bail!("--xi has {} entries, expected d={d}", xi.len());
    }
    Ok(xi)
}

pub fn run(ctx: &Context, a: MultArgs) -> Result<()> {
    let form = a.form.form()?;
    let d = form.dimension();
    let text = if a.eval {
        let lambda = single(&a.lambda)?;
        let xi = frequency(&a, d)?;
        let err = ErrorMultiplier::new(&ctx.measure(form, lambda)?, a.normalization.into())?;
        let main = err.main().eval(&xi);
        let exact = err.exact(&xi);
        let out = EvalOut {
            lambda,
            main: [main.re, main.im],
            exact,
            error: (main - exact).norm(),
            xi,
        };
        json_output(&a, &out)?
    } else if a.split {
        let lambda = single(&a.lambda)?;
        let xi = frequency(&a, d)?;
        let j = a.j.context("--j is required")?;
        let delta = a.delta.context("--delta is required")?;
        let main = MainTerm::new(form, lambda, a.normalization.into())?;
        let (low, high) = main.low_high_split(j, delta, &xi)?;
        let out = SplitOut {
            lambda,
            j,
            delta,
            xi,
            low: [low.re, low.im],
            high: [high.re, high.im],
        };
        json_output(&a, &out)?
    } else if a.scan {
        let cfg = ScanConfig {
            random_samples: a.random_samples,
            rational_samples: a.rational_samples,
            refine_candidates: a.refine_candidates,
            refine_rounds: a.refine_rounds,
            seed: a.seed,
            normalization: a.normalization.into(),
            max_samples: a.max_samples,
        };
        let mut reports = Vec::new();
        for lambda in parse_lambdas(&a.lambda)? {
            let mu = ctx.measure(form, lambda)?;
            reports.push(error_multiplier_scan(&mu, &cfg, ctx.strategy)?.report);
        }
        let fit = if reports.len() >= 5 {
            let pts: Vec<(f64, f64)> = reports
                .iter()
                .map(|r| ((r.lambda as f64).ln(), r.sup_estimate.ln()))
                .collect();
            let (slope, intercept, residual) = least_squares(&pts)?;
            Some(ScanFit {
                slope,
                intercept,
                residual,
                predicted: -(d as f64 - 3.0) / 4.0,
            })
        } else {
            None
        };
        json_output(&a, &ScanOut { reports, fit })?
    } else {
        let lambda = single(&a.lambda)?;
        let q = a.q.context("--q is required")?;
        let unit = a.a.context("--a is required")?;
        let x = parse_ints(a.x.as_deref().context("--x is required")?)?;
        if x.len() != d {
            bail!("--x has {} entries, expected d={d}", x.len());
        }
        let cfg = KernelConfig {
            arc_nodes: a.arc_nodes,
            sphere_nodes: a.sphere_nodes,
            max_nodes: a.max_nodes,
            self_tol: a.self_tol,
        };
        let c = kernel_identity_check(form, unit, q, lambda, &x, &cfg)?;
        let pass = c.residual <= a.tol;
        let out = KernelOut {
            lhs: c.lhs,
            rhs: c.rhs,
            residual: c.residual,
            arc_nodes: c.arc_nodes,
            sphere_nodes: c.sphere_nodes,
            tol: a.tol,
            pass,
        };
        let text = json_output(&a, &out)?;
        let mut w = ctx.writer(false)?;
        w.write_all(text.as_bytes())?;
        w.flush()?;
        if !pass {
            return Err(
                CheckFailed::Tolerance(format!("residual {:e} > {:e}", c.residual, a.tol)).into(),
            );
        }
        return Ok(());
    };
    let mut w = ctx.writer(false)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}
