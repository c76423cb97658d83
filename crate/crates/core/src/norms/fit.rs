//! Unweighted least squares on log–log pairs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fits `y = slope·x + intercept`; returns `(slope, intercept, residual_sum)`.
pub fn least_squares(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    let n = points.len();
    if n < 2 {
        return Err(Error::DegenerateFit(format!("{n} points")));
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) || !sxx.is_finite() || !sxy.is_finite() {
        return Err(Error::DegenerateFit("abscissae have zero variance".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = points
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum();
    Ok((slope, intercept, residual))
}

/// A log–log regression of estimates against λ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub pairs: Vec<(u64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    pub p: f64,
    pub q: f64,
}

impl ExponentFit {
    /// Needs at least five strictly increasing λ with positive estimates.
    pub fn from_pairs(pairs: Vec<(u64, f64)>, p: f64, q: f64) -> Result<Self> {
        if pairs.len() < 5 {
            return Err(Error::DegenerateFit(format!(
                "{} points, at least 5 required",
                pairs.len()
            )));
        }
        if pairs.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::DegenerateFit(
                "lambda values must be strictly increasing".into(),
            ));
        }
        if pairs
            .iter()
            .any(|&(l, v)| l == 0 || !(v > 0.0) || !v.is_finite())
        {
            return Err(Error::DegenerateFit("log of a nonpositive value".into()));
        }
        let logs: Vec<(f64, f64)> = pairs
            .iter()
            .map(|&(l, v)| ((l as f64).ln(), v.ln()))
            .collect();
        let (slope, intercept, residual) = least_squares(&logs)?;
        Ok(ExponentFit {
            pairs,
            slope,
            intercept,
            residual,
            p,
            q,
        })
    }

    pub fn predict(&self, lambda: f64) -> f64 {
        (self.intercept + self.slope * lambda.ln()).exp()
    }
}
