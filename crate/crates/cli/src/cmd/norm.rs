use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context as _, Result};
use arithsphere::norms::bounds::{
    birch_parameters, dual_exponent, eta, interpolation_bound, parse_exponent, rational_near,
    substitute_parameters, theorem_exponent, to_f64, trivial_bound_exponent, Q,
};
use arithsphere::norms::experiment::{run_rows, FormSpec, Manifest, Method};
use arithsphere::norms::probe::ProbeKind;
use arithsphere::norms::weak::{
    default_radii, dyadic_thresholds, restricted_weak_probe, WeakTable,
};
use arithsphere::norms::{ExponentFit, NormRow, PowerConfig};
use arithsphere::operators::Budget;
use arithsphere::DiagonalForm;
use clap::{ArgGroup, Args};
use serde::Serialize;

use super::FormArgs;
use crate::context::{config_line, json_output, Context};
use crate::select::{parse_ints, parse_lambdas, parse_reals};

#[derive(Args, Debug, Serialize)]
#[command(group(ArgGroup::new("mode").args(["bounds", "weak"])))]
pub struct NormArgs {
    /// Closed-form exponents (Birch parameters, η, interpolation, trivial, theorem) as JSON.
    #[arg(long)]
    bounds: bool,
    /// Restricted weak-type table for balls, as CSV.
    #[arg(long)]
    weak: bool,

    #[command(flatten)]
    form: FormArgs,
    /// `5/3`, `1.6667`, `1.5`.
    #[arg(long)]
    p: Option<String>,
    /// Target exponent (`inf` allowed); defaults to p'.
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    /// `probe` or `power`.
    #[arg(long, default_value = "probe")]
    method: String,
    /// Probes for `--method probe`: delta, ball.
    #[arg(long, default_value = "delta,ball")]
    probes: String,
    #[arg(long, default_value_t = PowerConfig::default().max_iters)]
    max_iters: usize,
    #[arg(long, default_value_t = PowerConfig::default().rel_tol)]
    rel_tol: f64,
    /// Radius of the symmetric domain (defaults to ⌈√λ⌉).
    #[arg(long)]
    radius: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cell cap for dense work.
    #[arg(long, default_value_t = Budget::default().max_cells)]
    box_cap: usize,
    /// Experiment manifest (JSON); replaces the experiment flags.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Append rows to `--out` instead of rewriting it.
    #[arg(long)]
    append: bool,
    /// Write 0 in the `seconds` column so reruns are byte-identical.
    #[arg(long)]
    no_timing: bool,

    /// Ball radii for `--weak` (default 1, ⌈λ^{1/4}⌉, ⌈√λ⌉).
    #[arg(long)]
    radii: Option<String>,
    /// Thresholds for `--weak` (default 1/2, 1/4, ... below 1/(2N)).
    #[arg(long)]
    thresholds: Option<String>,
}

/// Printed as `# fit {...}` after the rows.
#[derive(Debug, Serialize)]
pub struct FitLine {
    #[serde(flatten)]
    pub fit: ExponentFit,
    /// `-(d/2)(2/p - 1)`, when p is in the theorem's range.
    pub predicted_theorem: Option<f64>,
    /// `-((d-2)/2)(2/p - 1)`.
    pub predicted_trivial: Option<f64>,
}

fn exact_p(p: f64) -> Result<Q> {
    rational_near(p, 1e-9).with_context(|| format!("p={p} is not finite"))
}

pub fn predicted(form: DiagonalForm, p: f64) -> (Option<f64>, Option<f64>) {
    let Ok(pq) = exact_p(p) else {
        return (None, None);
    };
    let theorem = form
        .is_sphere()
        .then(|| theorem_exponent(form.dimension(), pq).ok())
        .flatten()
        .map(|e| -to_f64(e));
    let trivial = trivial_bound_exponent(form, pq).ok().map(|e| -to_f64(e));
    (theorem, trivial)
}

fn parse_q(s: &str) -> Result<f64> {
    match s.trim() {
        "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
        t => Ok(to_f64(parse_exponent(t)?)),
    }
}

fn manifest(a: &NormArgs) -> Result<Manifest> {
    if let Some(path) = &a.manifest {
        let text =
            fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let m: Manifest = serde_json::from_str(&text)
            .with_context(|| format!("{}: invalid manifest", path.display()))?;
        return Ok(m);
    }
    let p = to_f64(parse_exponent(a.p.as_deref().context("--p is required")?)?);
    let q = a.q.as_deref().map(parse_q).transpose()?;
    let probes = a
        .probes
        .split(',')
        .map(|s| match s.trim() {
            "delta" => Ok(ProbeKind::Delta),
            "ball" => Ok(ProbeKind::Ball),
            other => bail!("unknown probe `{other}`; expected delta or ball"),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Manifest {
        form: FormSpec {
            d: a.form.d,
            k: a.form.k,
        },
        p,
        q,
        lambda_list: parse_lambdas(a.lambda.as_deref().context("--lambda is required")?)?,
        method: a.method.parse::<Method>()?,
        seed: a.seed,
        box_cap: a.box_cap,
        probes,
        power: PowerConfig {
            max_iters: a.max_iters,
            rel_tol: a.rel_tol,
        },
        domain_radius: a.radius,
    })
}

fn experiment(ctx: &Context, a: &NormArgs) -> Result<()> {
    let m = manifest(a)?;
    m.validate()?;
    let form = m.form.form()?;
    let fresh = !(a.append && ctx.out_has_content());
    let mut out = ctx.writer(a.append)?;
    if fresh {
        writeln!(out, "{}", config_line(&m)?)?;
        writeln!(out, "{}", NormRow::CSV_HEADER)?;
    }
    let rows = run_rows(&m, |lambda| ctx.measure(form, lambda), ctx.strategy)?;
    let mut done = Vec::with_capacity(rows.len());
    for row in rows {
        let mut row = match row {
            Ok(r) => r,
            Err(e) => {
                out.flush()?;
                return Err(e.into());
            }
        };
        if a.no_timing {
            row.seconds = 0.0;
        }
        writeln!(out, "{}", row.to_csv())?;
        done.push((row.lambda, row.estimate));
    }
    if done.len() >= 5 {
        let fit = ExponentFit::from_pairs(done, m.p, m.q())?;
        let (predicted_theorem, predicted_trivial) = predicted(form, m.p);
        let line = FitLine {
            fit,
            predicted_theorem,
            predicted_trivial,
        };
        writeln!(out, "# fit {}", serde_json::to_string(&line)?)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Params {
    alpha: String,
    beta: String,
    gamma: String,
}

#[derive(Serialize)]
struct BoundsOut {
    d: usize,
    k: u32,
    p: String,
    dual_p: f64,
    /// Set when Birch's criterion `d > (k-1)2^k` holds.
    birch: Option<Params>,
    birch_error: Option<String>,
    /// The same formulas without the criterion.
    substituted: Params,
    eta: String,
    interpolation: String,
    interpolation_warning: Option<String>,
    trivial_exponent: String,
    theorem_exponent: Option<String>,
}

fn bounds(ctx: &Context, a: &NormArgs) -> Result<()> {
    let form = a.form.form()?;
    let p = parse_exponent(a.p.as_deref().context("--p is required")?)?;
    let show = |b: &arithsphere::norms::BirchParameters| Params {
        alpha: b.alpha.to_string(),
        beta: b.beta.to_string(),
        gamma: b.gamma.to_string(),
    };
    let (birch, birch_error) = match birch_parameters(form) {
        Ok(b) => (Some(show(&b)), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let sub = substitute_parameters(form)?;
    let interp = interpolation_bound(sub.alpha, sub.beta, sub.gamma, p)?;
    let out = BoundsOut {
        d: form.dimension(),
        k: form.degree(),
        p: p.to_string(),
        dual_p: dual_exponent(to_f64(p)),
        birch,
        birch_error,
        substituted: show(&sub),
        eta: eta(&sub, p)?.to_string(),
        interpolation: interp.exponent.to_string(),
        interpolation_warning: interp.warning,
        trivial_exponent: trivial_bound_exponent(form, p)?.to_string(),
        theorem_exponent: form
            .is_sphere()
            .then(|| theorem_exponent(form.dimension(), p).ok())
            .flatten()
            .map(|e| e.to_string()),
    };
    let mut w = ctx.writer(false)?;
    w.write_all(json_output(a, &out)?.as_bytes())?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct WeakSummary {
    lambda: u64,
    max_ratio: f64,
}

fn weak(ctx: &Context, a: &NormArgs) -> Result<()> {
    let form = a.form.form()?;
    let lambdas = parse_lambdas(a.lambda.as_deref().context("--lambda is required")?)?;
    let radii = match &a.radii {
        Some(s) => Some(
            parse_ints(s)?
                .into_iter()
                .map(|r| u64::try_from(r).context("radii must be nonnegative"))
                .collect::<Result<Vec<_>>>()?,
        ),
        None => None,
    };
    let thresholds = a.thresholds.as_deref().map(parse_reals).transpose()?;
    let budget = Budget {
        max_cells: a.box_cap,
    };
    let mut out = ctx.writer(false)?;
    writeln!(out, "{}", config_line(a)?)?;
    writeln!(out, "{}", WeakTable::CSV_HEADER)?;
    let mut summary = Vec::with_capacity(lambdas.len());
    for lambda in lambdas {
        let table = ctx
            .measure(form, lambda)
            .map_err(anyhow::Error::from)
            .and_then(|mu| {
                let r = radii.clone().unwrap_or_else(|| default_radii(lambda));
                let t = thresholds
                    .clone()
                    .unwrap_or_else(|| dyadic_thresholds(mu.count()));
                Ok(restricted_weak_probe(&mu, &r, &t, ctx.strategy, budget)?)
            });
        let table = match table {
            Ok(t) => t,
            Err(e) => {
                out.flush()?;
                return Err(e);
            }
        };
        out.write_all(table.to_csv_rows().as_bytes())?;
        summary.push(WeakSummary {
            lambda,
            max_ratio: table.max_ratio,
        });
    }
    writeln!(out, "# max_ratio {}", serde_json::to_string(&summary)?)?;
    out.flush()?;
    Ok(())
}

pub fn run(ctx: &Context, a: NormArgs) -> Result<()> {
    if a.bounds {
        bounds(ctx, &a)
    } else if a.weak {
        weak(ctx, &a)
    } else {
        experiment(ctx, &a)
    }
}
