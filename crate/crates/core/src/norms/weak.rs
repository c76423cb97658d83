//! Superlevel sets of `A_λ 1_X` for balls `X`, against the restricted
//! weak-type bound `λ^{(d+1)/2 - d(d-1)/2} T^{-(d+1)} |X|^d`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Strategy;
use crate::norms::symmetric::SymmetricOperator;
use crate::operators::{ArithmeticMeasure, Budget};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakRow {
    pub lambda: u64,
    pub radius: u64,
    pub threshold: f64,
    pub x_size: u64,
    pub level_size: u64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakTable {
    pub lambda: u64,
    pub rows: Vec<WeakRow>,
    pub max_ratio: f64,
}

impl WeakTable {
    pub const CSV_HEADER: &'static str = "lambda,radius,threshold,x_size,level_size,bound,ratio";

    pub fn to_csv_rows(&self) -> String {
        self.rows
            .iter()
            .map(|r| {
                format!(
                    "{},{},{:e},{},{},{:e},{:e}\n",
                    r.lambda, r.radius, r.threshold, r.x_size, r.level_size, r.bound, r.ratio
                )
            })
            .collect()
    }
}

/// `λ^{(d+1)/2 - d(d-1)/2} T^{-(d+1)} |X|^d`.
pub fn weak_bound(d: usize, lambda: u64, threshold: f64, x_size: f64) -> f64 {
    let d = d as f64;
    let e = (d + 1.0) / 2.0 - d * (d - 1.0) / 2.0;
    (lambda as f64).powf(e) * threshold.powf(-(d + 1.0)) * x_size.powf(d)
}

/// `2^{-1}, ..., 2^{-i}` down to just below `1/(2N)`.
pub fn dyadic_thresholds(count: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let floor = 0.5 / count.max(1) as f64;
    let mut t = 0.5;
    loop {
        out.push(t);
        if t <= floor {
            break;
        }
        t *= 0.5;
    }
    out
}

/// The radii `1, ⌈λ^{1/4}⌉, ⌈√λ⌉`, deduplicated.
pub fn default_radii(lambda: u64) -> Vec<u64> {
    let l = lambda as f64;
    let mut r = vec![1, l.powf(0.25).ceil() as u64, l.sqrt().ceil() as u64];
    r.dedup();
    r
}

/// Exact superlevel-set sizes `|{A_λ 1_X > T}|` for the balls `X = {|x| ≤ R}`.
pub fn restricted_weak_probe(
    mu: &ArithmeticMeasure,
    radii: &[u64],
    thresholds: &[f64],
    strategy: Strategy,
    budget: Budget,
) -> Result<WeakTable> {
    let form = mu.shell().form();
    if !form.is_sphere() {
        return Err(Error::Precondition(
            "the restricted weak-type table needs the sphere".into(),
        ));
    }
    let d = mu.dim();
    let lambda = mu.lambda();
    if d == 4 && lambda.is_multiple_of(2) {
        return Err(Error::Precondition(format!(
            "lambda={lambda} must be odd for d=4"
        )));
    }
    if thresholds.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::Precondition("thresholds must be positive".into()));
    }
    let mut rows = Vec::with_capacity(radii.len() * thresholds.len());
    for &r in radii {
        let op = SymmetricOperator::new(mu, r, strategy, budget)?;
        let x = op.input().ball(r);
        let x_size = op.input().points().round() as u64;
        let af = op.apply(&x);
        let w = op.output().weights();
        for &t in thresholds {
            let level: f64 = af
                .iter()
                .zip(w)
                .filter(|(v, _)| **v > t)
                .fold(0.0, |acc, (_, w)| acc + w);
            let bound = weak_bound(d, lambda, t, x_size as f64);
            rows.push(WeakRow {
                lambda,
                radius: r,
                threshold: t,
                x_size,
                level_size: level.round() as u64,
                bound,
                ratio: level / bound,
            });
        }
    }
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(WeakTable {
        lambda,
        rows,
        max_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{enumerate_shell, DiagonalForm};

    fn measure(lambda: u64) -> ArithmeticMeasure {
        let form = DiagonalForm::sphere(4).unwrap();
        ArithmeticMeasure::new(enumerate_shell(form, lambda, 1 << 20).unwrap()).unwrap()
    }

    #[test]
    fn single_point_and_empty_levels() {
        let mu = measure(25);
        let n = mu.count() as f64;
        let t = restricted_weak_probe(
            &mu,
            &[0],
            &[0.5 / n, 2.0 / n],
            Strategy::Sequential,
            Budget::default(),
        )
        .unwrap();
        assert_eq!(t.rows[0].x_size, 1);
        assert_eq!(t.rows[0].level_size, mu.count() as u64);
        assert_eq!(t.rows[1].level_size, 0);
        assert_eq!(t.rows[1].ratio, 0.0);
    }

    #[test]
    fn threshold_above_the_sup_is_empty() {
        let mu = measure(9);
        let t = restricted_weak_probe(&mu, &[3], &[1.0], Strategy::Sequential, Budget::default())
            .unwrap();
        assert_eq!(t.rows[0].level_size, 0);
        assert_eq!(t.rows[0].x_size, ball_count(3));
    }

    fn ball_count(r: i64) -> u64 {
        let side = (-r..=r).collect::<Vec<_>>();
        let mut n = 0;
        for a in &side {
            for b in &side {
                for c in &side {
                    for e in &side {
                        if a * a + b * b + c * c + e * e <= r * r {
                            n += 1;
                        }
                    }
                }
            }
        }
        n
    }

    #[test]
    fn thresholds_and_radii() {
        let t = dyadic_thresholds(24);
        assert_eq!(t.first(), Some(&0.5));
        assert!(*t.last().unwrap() <= 0.5 / 24.0);
        assert_eq!(default_radii(1), vec![1]);
        assert_eq!(default_radii(401), vec![1, 5, 21]);
        assert!(restricted_weak_probe(
            &measure(10),
            &[1],
            &[0.5],
            Strategy::Sequential,
            Budget::default()
        )
        .is_err());
    }

    #[test]
    fn bound_exponent_in_four_dimensions() {
        let b = weak_bound(4, 16, 0.5, 2.0);
        assert!((b - 16f64.powf(-3.5) * 32.0 * 16.0).abs() < 1e-15);
    }
}
