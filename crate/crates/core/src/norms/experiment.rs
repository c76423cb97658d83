//! Norm experiments over a list of λ, with exponent fits.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Strategy;
use crate::lattice::{enumerate_shell, DiagonalForm};
use crate::norms::fit::ExponentFit;
use crate::norms::power::{power_iteration_lower_bound, Domain, PowerConfig};
use crate::norms::probe::{ball_radius, probe_ratio, Probe, ProbeKind};
use crate::operators::{ArithmeticMeasure, Budget};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ProbeBest,
    PowerIteration,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::ProbeBest => "probe_best",
            Method::PowerIteration => "power_iteration",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "probe" | "probe_best" => Ok(Method::ProbeBest),
            "power" | "power_iteration" => Ok(Method::PowerIteration),
            _ => Err(Error::Precondition(format!(
                "unknown method {s:?}; expected probe_best or power_iteration"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormSpec {
    pub d: usize,
    pub k: u32,
}

impl FormSpec {
    pub fn form(&self) -> Result<DiagonalForm> {
        DiagonalForm::new(self.d, self.k)
    }
}

fn default_probes() -> Vec<ProbeKind> {
    vec![ProbeKind::Delta, ProbeKind::Ball]
}

fn default_box_cap() -> usize {
    Budget::default().max_cells
}

/// The experiment manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub form: FormSpec,
    pub p: f64,
    /// Defaults to the dual exponent `p'`.
    #[serde(default)]
    pub q: Option<f64>,
    pub lambda_list: Vec<u64>,
    pub method: Method,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_box_cap")]
    pub box_cap: usize,
    #[serde(default = "default_probes")]
    pub probes: Vec<ProbeKind>,
    #[serde(default)]
    pub power: PowerConfig,
    /// Radius of the symmetric domain; `⌈√λ⌉` when absent.
    #[serde(default)]
    pub domain_radius: Option<u64>,
}

impl Manifest {
    pub fn q(&self) -> f64 {
        self.q
            .unwrap_or_else(|| crate::norms::bounds::dual_exponent(self.p))
    }

    pub fn validate(&self) -> Result<()> {
        self.form.form()?;
        let q = self.q();
        if !(1.0..=2.0).contains(&self.p) || q.is_nan() || q < 2.0 {
            return Err(Error::InvalidExponent(format!(
                "need 1 <= p <= 2 <= q, got p={}, q={q}",
                self.p
            )));
        }
        if self.lambda_list.is_empty() {
            return Err(Error::Precondition("lambda_list is empty".into()));
        }
        if self.lambda_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Precondition(
                "lambda_list must be strictly increasing".into(),
            ));
        }
        if self.method == Method::ProbeBest && self.probes.is_empty() {
            return Err(Error::Precondition(
                "probe_best needs at least one probe".into(),
            ));
        }
        Ok(())
    }
}

/// One line of `lambda,estimate,method,iters,seconds`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormRow {
    pub lambda: u64,
    pub estimate: f64,
    /// The method with the probe or seed that achieved the estimate.
    pub method: String,
    pub iters: usize,
    pub seconds: f64,
}

impl NormRow {
    pub const CSV_HEADER: &'static str = "lambda,estimate,method,iters,seconds";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{:.17e},{},{},{:.3}",
            self.lambda, self.estimate, self.method, self.iters, self.seconds
        )
    }

    pub fn from_csv(line: &str, lineno: usize) -> Result<Self> {
        let cols: Vec<&str> = line.trim().split(',').collect();
        if cols.len() != 5 {
            return Err(Error::parse(
                lineno,
                format!("expected 5 columns, got {}", cols.len()),
            ));
        }
        let bad = |what: &str| Error::parse(lineno, format!("bad {what}"));
        Ok(NormRow {
            lambda: cols[0].parse().map_err(|_| bad("lambda"))?,
            estimate: cols[1].parse().map_err(|_| bad("estimate"))?,
            method: cols[2].to_string(),
            iters: cols[3].parse().map_err(|_| bad("iters"))?,
            seconds: cols[4].parse().map_err(|_| bad("seconds"))?,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormExperiment {
    pub rows: Vec<NormRow>,
    /// Present when at least five λ were run.
    pub fit: Option<ExponentFit>,
}

/// Best ratio over the probes; returns the estimate and the winning probe.
pub fn probe_best(
    mu: &ArithmeticMeasure,
    p: f64,
    q: f64,
    probes: &[ProbeKind],
    strategy: Strategy,
    budget: Budget,
) -> Result<(f64, String)> {
    let mut best: Option<(f64, String)> = None;
    for kind in probes {
        let probe = match kind {
            ProbeKind::Delta => Probe::Delta,
            ProbeKind::Ball => Probe::Ball(ball_radius(mu.lambda())),
        };
        let r = probe_ratio(&probe, mu, p, q, strategy, budget)?;
        if best.as_ref().is_none_or(|b| r > b.0) {
            best = Some((r, probe.name()));
        }
    }
    best.ok_or_else(|| Error::Precondition("no probes".into()))
}

fn one_lambda(m: &Manifest, mu: &ArithmeticMeasure, strategy: Strategy) -> Result<NormRow> {
    let start = Instant::now();
    let budget = Budget {
        max_cells: m.box_cap,
    };
    let (p, q) = (m.p, m.q());
    let (estimate, label, iters) = match m.method {
        Method::ProbeBest => {
            let (e, probe) = probe_best(mu, p, q, &m.probes, strategy, budget)?;
            (e, probe, 0)
        }
        Method::PowerIteration => {
            let domain = match m.domain_radius {
                Some(radius) => Domain::Symmetric { radius },
                None => Domain::symmetric_for(mu.lambda()),
            };
            let est =
                power_iteration_lower_bound(mu, p, q, domain, &m.power, m.seed, strategy, budget)?;
            (est.estimate, est.seed, est.iters)
        }
    };
    Ok(NormRow {
        lambda: mu.lambda(),
        estimate,
        method: format!("{}[{label}]", m.method),
        iters,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// One result per λ, in the order of `lambda_list`.
pub fn run_rows<L>(m: &Manifest, load: L, strategy: Strategy) -> Result<Vec<Result<NormRow>>>
where
    L: Fn(u64) -> Result<ArithmeticMeasure> + Sync + Send,
{
    m.validate()?;
    Ok(strategy.map(&m.lambda_list, |&lambda| {
        let mu = load(lambda)?;
        one_lambda(m, &mu, strategy)
    }))
}

/// Runs the manifest with shells from `load`, one task per λ.
pub fn run_manifest_with<L>(m: &Manifest, load: L, strategy: Strategy) -> Result<NormExperiment>
where
    L: Fn(u64) -> Result<ArithmeticMeasure> + Sync + Send,
{
    let rows = run_rows(m, load, strategy)?
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let fit = if rows.len() >= 5 {
        let pairs = rows.iter().map(|r| (r.lambda, r.estimate)).collect();
        Some(ExponentFit::from_pairs(pairs, m.p, m.q())?)
    } else {
        None
    };
    Ok(NormExperiment { rows, fit })
}

/// Shells enumerated in memory, capped at `cap` points each.
pub fn enumerating_loader(
    form: DiagonalForm,
    cap: usize,
) -> impl Fn(u64) -> Result<ArithmeticMeasure> + Sync + Send {
    move |lambda| ArithmeticMeasure::new(enumerate_shell(form, lambda, cap)?)
}

pub fn run_manifest(m: &Manifest, strategy: Strategy) -> Result<NormExperiment> {
    run_manifest_with(m, enumerating_loader(m.form.form()?, 1 << 24), strategy)
}

/// Log–log fit of the estimates of `method` over `lambdas`.
pub fn fit_exponent(
    form: DiagonalForm,
    p: f64,
    q: f64,
    lambdas: &[u64],
    method: Method,
    strategy: Strategy,
) -> Result<ExponentFit> {
    let m = Manifest {
        form: FormSpec {
            d: form.dimension(),
            k: form.degree(),
        },
        p,
        q: Some(q),
        lambda_list: lambdas.to_vec(),
        method,
        seed: 0,
        box_cap: default_box_cap(),
        probes: default_probes(),
        power: PowerConfig::default(),
        domain_radius: None,
    };
    run_manifest(&m, strategy)?.fit.ok_or_else(|| {
        Error::DegenerateFit(format!("{} points, at least 5 required", lambdas.len()))
    })
}
