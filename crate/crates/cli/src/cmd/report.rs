use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context as _, Result};
use arithsphere::norms::experiment::Manifest;
use arithsphere::norms::fit::least_squares;
use arithsphere::norms::NormRow;
use clap::Args;
use serde::Serialize;

use super::norm::predicted;
use crate::context::{config_line, Context};

#[derive(Args, Debug, Serialize)]
pub struct ReportArgs {
    /// Outputs of `norm` (CSV) and `mult --scan` (JSON).
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
}

const HEADER: &str =
    "kind,d,k,p,q,method,points,lambda_min,lambda_max,fitted_slope,residual,predicted_theorem,predicted_trivial,sources";

struct Line {
    kind: &'static str,
    d: usize,
    k: u32,
    p: Option<f64>,
    q: Option<f64>,
    method: String,
    pairs: Vec<(u64, f64)>,
    predicted_theorem: Option<f64>,
    predicted_trivial: Option<f64>,
    sources: Vec<String>,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x}"))
}

impl Line {
    fn to_csv(&self) -> Result<String> {
        let fit = if self.pairs.len() >= 2 {
            let pts: Vec<(f64, f64)> = self
                .pairs
                .iter()
                .filter(|p| p.1 > 0.0)
                .map(|&(l, v)| ((l as f64).ln(), v.ln()))
                .collect();
            least_squares(&pts).ok()
        } else {
            None
        };
        Ok(format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.kind,
            self.d,
            self.k,
            opt(self.p),
            opt(self.q),
            self.method,
            self.pairs.len(),
            self.pairs.first().map_or(0, |p| p.0),
            self.pairs.last().map_or(0, |p| p.0),
            opt(fit.map(|f| f.0)),
            opt(fit.map(|f| f.2)),
            opt(self.predicted_theorem),
            opt(self.predicted_trivial),
            self.sources.join(";"),
        ))
    }
}

/// Rows of a `norm` CSV and its manifest.
fn read_norm(text: &str, name: &str) -> Result<(Manifest, Vec<NormRow>)> {
    let mut lines = text.lines().enumerate();
    let (_, first) = lines.next().context("empty file")?;
    let json = first
        .strip_prefix("# config ")
        .with_context(|| format!("{name}:1: missing `# config` line"))?;
    let m: Manifest =
        serde_json::from_str(json).with_context(|| format!("{name}:1: not a norm manifest"))?;
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.starts_with('#') || line == NormRow::CSV_HEADER || line.trim().is_empty() {
            continue;
        }
        rows.push(NormRow::from_csv(line, i + 1).with_context(|| name.to_string())?);
    }
    Ok((m, rows))
}

/// Merged `norm` rows sharing one manifest (up to its λ list).
struct NormGroup {
    manifest: Manifest,
    rows: BTreeMap<u64, f64>,
    sources: Vec<String>,
    family: String,
}

fn method_family(method: &str) -> &str {
    method.split('[').next().unwrap_or(method)
}

pub fn run(ctx: &Context, a: ReportArgs) -> Result<()> {
    let mut norms: BTreeMap<String, NormGroup> = BTreeMap::new();
    let mut lines = Vec::new();
    for path in &a.inputs {
        let name = path.display().to_string();
        let text = fs::read_to_string(path).with_context(|| format!("cannot read {name}"))?;
        if text.starts_with("# config ") {
            let (m, rows) = read_norm(&text, &name)?;
            let mut key_m = m.clone();
            key_m.lambda_list.clear();
            let key = serde_json::to_string(&key_m)?;
            let family = rows.first().map_or_else(
                || m.method.to_string(),
                |r| method_family(&r.method).to_string(),
            );
            let group = norms.entry(key).or_insert_with(|| NormGroup {
                manifest: m,
                rows: BTreeMap::new(),
                sources: Vec::new(),
                family,
            });
            for r in rows {
                group.rows.insert(r.lambda, r.estimate);
            }
            group.sources.push(name);
        } else {
            let v: serde_json::Value = serde_json::from_str(&text)
                .with_context(|| format!("{name}: neither a norm CSV nor JSON"))?;
            let Some(reports) = v.get("reports").and_then(|r| r.as_array()) else {
                bail!("{name}: JSON without `reports`");
            };
            let d = v
                .pointer("/config/form/d")
                .and_then(|x| x.as_u64())
                .unwrap_or(4) as usize;
            let k = v
                .pointer("/config/form/k")
                .and_then(|x| x.as_u64())
                .unwrap_or(2) as u32;
            let mut pairs = reports
                .iter()
                .map(|r| {
                    let l = r.get("lambda").and_then(|x| x.as_u64());
                    let s = r.get("sup_estimate").and_then(|x| x.as_f64());
                    l.zip(s)
                        .with_context(|| format!("{name}: malformed report"))
                })
                .collect::<Result<Vec<_>>>()?;
            pairs.sort_by_key(|p| p.0);
            lines.push(Line {
                kind: "error_scan",
                d,
                k,
                p: None,
                q: None,
                method: "scan".into(),
                pairs,
                predicted_theorem: Some(-(d as f64 - 3.0) / 4.0),
                predicted_trivial: None,
                sources: vec![name],
            });
        }
    }
    for NormGroup {
        manifest: m,
        rows,
        sources,
        family,
    } in norms.into_values()
    {
        let (theorem, trivial) = predicted(m.form.form()?, m.p);
        lines.push(Line {
            kind: "norm",
            d: m.form.d,
            k: m.form.k,
            p: Some(m.p),
            q: Some(m.q()),
            method: family,
            pairs: rows.into_iter().collect(),
            predicted_theorem: theorem,
            predicted_trivial: trivial,
            sources,
        });
    }
    lines.sort_by(|a, b| a.kind.cmp(b.kind).then(a.sources.cmp(&b.sources)));
    let mut out = ctx.writer(false)?;
    writeln!(out, "{}", config_line(&a)?)?;
    writeln!(out, "{HEADER}")?;
    for l in &lines {
        writeln!(out, "{}", l.to_csv()?)?;
    }
    out.flush()?;
    Ok(())
}
