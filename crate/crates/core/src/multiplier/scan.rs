//! Sampled lower bounds for `‖Ê_λ‖_∞ = sup_ξ |σ̂_λ(ξ) - M̂_λ(ξ)|`.
//!
//! `|Ê_λ|` is invariant under signed coordinate permutations and integer
//! translations of `ξ`, so every sample is folded into the sorted cell
//! `0 ≤ ξ_1 ≤ ... ≤ ξ_d ≤ 1/2`.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Strategy;
use crate::multiplier::main_term::{MainTerm, Normalization};
use crate::operators::{ArithmeticMeasure, SigmaHat};

/// Exact minus main term.
#[derive(Clone, Debug)]
pub struct ErrorMultiplier {
    exact: SigmaHat,
    main: MainTerm,
}

impl ErrorMultiplier {
    pub fn new(mu: &ArithmeticMeasure, normalization: Normalization) -> Result<Self> {
        let main = MainTerm::new(mu.shell().form(), mu.lambda(), normalization)?;
        Ok(ErrorMultiplier {
            exact: SigmaHat::new(mu),
            main,
        })
    }

    pub fn main(&self) -> &MainTerm {
        &self.main
    }

    pub fn exact(&self, xi: &[f64]) -> f64 {
        self.exact.eval(xi)
    }

    pub fn abs_error(&self, xi: &[f64]) -> f64 {
        (self.main.eval(xi) - self.exact.eval(xi)).norm()
    }
}

/// Maps `ξ` into the sorted cell `[0, 1/2]^d`.
pub fn fold(xi: &mut [f64]) {
    for v in xi.iter_mut() {
        *v = (*v - v.round()).abs();
    }
    xi.sort_by(|a, b| a.total_cmp(b));
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub random_samples: usize,
    pub rational_samples: usize,
    pub refine_candidates: usize,
    pub refine_rounds: usize,
    pub seed: u64,
    pub normalization: Normalization,
    pub max_samples: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            random_samples: 20_000,
            rational_samples: 20_000,
            refine_candidates: 16,
            refine_rounds: 40,
            seed: 1,
            normalization: Normalization::ShellCount,
            max_samples: 1_000_000,
        }
    }
}

impl ScanConfig {
    /// Upper bound on the number of multiplier evaluations.
    pub fn planned_samples(&self, d: usize) -> usize {
        self.random_samples
            + self.rational_samples
            + self.refine_candidates * (1 + self.refine_rounds * 2 * d)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorScanReport {
    pub lambda: u64,
    pub cutoff: u64,
    pub sup_estimate: f64,
    pub argmax_xi: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorScan {
    pub report: ErrorScanReport,
    /// Running maximum after the initial sweep and after each refinement round.
    pub trace: Vec<f64>,
}

fn sweep_points(cfg: &ScanConfig, d: usize, q_max: u64, lambda: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut pts = Vec::with_capacity(cfg.random_samples + cfg.rational_samples);
    for _ in 0..cfg.random_samples {
        let mut xi: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * 0.5).collect();
        fold(&mut xi);
        pts.push(xi);
    }
    // Rationals just beyond the cutoff, where the main term stops tracking σ̂.
    let spreads = [0.0, 0.25, 0.5, 1.0, 2.0];
    let width = 1.0 / (lambda as f64).sqrt();
    for _ in 0..cfg.rational_samples {
        let q = rng.random_range(1..=3 * q_max.max(1));
        let spread = *spreads.choose(&mut rng).expect("nonempty");
        let mut xi: Vec<f64> = (0..d)
            .map(|_| {
                let a = rng.random_range(0..=q / 2) as f64;
                a / q as f64 + spread * width * (rng.random::<f64>() - 0.5) / q as f64
            })
            .collect();
        fold(&mut xi);
        pts.push(xi);
    }
    pts
}

/// Coordinate descent ascent on `|Ê|` from `start`; returns the value after each round.
fn refine(
    err: &ErrorMultiplier,
    start: (Vec<f64>, f64),
    rounds: usize,
    step0: f64,
) -> (Vec<f64>, Vec<f64>) {
    let (mut xi, mut best) = start;
    let mut step = step0;
    let mut values = Vec::with_capacity(rounds);
    let mut trial = xi.clone();
    for _ in 0..rounds {
        let mut improved = false;
        for i in 0..xi.len() {
            for sgn in [1.0, -1.0] {
                trial.copy_from_slice(&xi);
                trial[i] += sgn * step;
                let v = err.abs_error(&trial);
                if v > best {
                    best = v;
                    xi.copy_from_slice(&trial);
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
        values.push(best);
    }
    fold(&mut xi);
    (xi, values)
}

/// Samples `|Ê_λ|`, then refines the best samples by coordinate ascent.
///
/// The estimate is a maximum over evaluated points and therefore a lower bound
/// for the sup norm; refinement can only raise it.
pub fn error_multiplier_scan(
    mu: &ArithmeticMeasure,
    cfg: &ScanConfig,
    strategy: Strategy,
) -> Result<ErrorScan> {
    let d = mu.dim();
    let planned = cfg.planned_samples(d);
    if planned > cfg.max_samples {
        return Err(Error::Budget(format!(
            "scan plans {planned} samples, over the budget of {}",
            cfg.max_samples
        )));
    }
    let err = ErrorMultiplier::new(mu, cfg.normalization)?;
    let lambda = mu.lambda();
    let pts = sweep_points(cfg, d, err.main.q_max(), lambda);
    let vals = strategy.map(&pts, |xi| err.abs_error(xi));
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]).then(a.cmp(&b)));
    let mut sup = order.first().map_or(0.0, |&i| vals[i]);
    let mut argmax = order
        .first()
        .map_or_else(|| vec![0.0; d], |&i| pts[i].clone());
    let mut trace = vec![sup];
    let starts: Vec<(Vec<f64>, f64)> = order
        .iter()
        .take(cfg.refine_candidates)
        .map(|&i| (pts[i].clone(), vals[i]))
        .collect();
    let step0 = 0.25 / (lambda as f64).sqrt();
    let refined = strategy.map(&starts, |s| {
        refine(&err, s.clone(), cfg.refine_rounds, step0)
    });
    for round in 0..cfg.refine_rounds {
        let best = refined.iter().map(|r| r.1[round]).fold(sup, f64::max);
        trace.push(best);
    }
    for (xi, values) in &refined {
        if let Some(&v) = values.last() {
            if v > sup {
                sup = v;
                argmax = xi.clone();
            }
        }
    }
    Ok(ErrorScan {
        report: ErrorScanReport {
            lambda,
            cutoff: err.main.cutoff(),
            sup_estimate: sup,
            argmax_xi: argmax,
            samples: planned,
            seed: cfg.seed,
        },
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{enumerate_shell, DiagonalForm};

    fn measure(lambda: u64) -> ArithmeticMeasure {
        let form = DiagonalForm::sphere(4).unwrap();
        ArithmeticMeasure::new(enumerate_shell(form, lambda, 1 << 22).unwrap()).unwrap()
    }

    #[test]
    fn folding() {
        let mut xi = vec![0.7, -0.2, 1.45, 0.0];
        fold(&mut xi);
        let want = [0.0, 0.2, 0.3, 0.45];
        for (a, b) in xi.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn error_is_invariant_under_the_symmetry_group() {
        let err = ErrorMultiplier::new(&measure(57), Normalization::ShellCount).unwrap();
        let xi = [0.13, -0.41, 0.27, 0.05];
        let base = err.abs_error(&xi);
        for alt in [
            [0.41, 0.13, 0.27, 0.05],
            [-0.13, 0.41, -0.27, 0.05],
            [1.13, 0.59, 0.27, -0.95],
        ] {
            assert!((err.abs_error(&alt) - base).abs() < 1e-12);
        }
    }

    #[test]
    fn small_lambda_is_bounded_and_refinement_is_monotone() {
        let cfg = ScanConfig {
            random_samples: 500,
            rational_samples: 500,
            refine_candidates: 4,
            refine_rounds: 10,
            normalization: Normalization::Unit,
            ..ScanConfig::default()
        };
        let scan = error_multiplier_scan(&measure(1), &cfg, Strategy::Parallel).unwrap();
        assert!(scan.report.sup_estimate <= 2.0);
        assert!(scan.trace.windows(2).all(|w| w[1] >= w[0]));
        let seq = error_multiplier_scan(&measure(1), &cfg, Strategy::Sequential).unwrap();
        assert_eq!(seq, scan);
    }

    #[test]
    fn budget_is_enforced() {
        let cfg = ScanConfig {
            random_samples: 2_000_000,
            ..ScanConfig::default()
        };
        assert!(matches!(
            error_multiplier_scan(&measure(9), &cfg, Strategy::Sequential),
            Err(Error::Budget(_))
        ));
    }
}
