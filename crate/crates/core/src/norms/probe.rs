//! Exact ratios `‖A_λ f‖_q / ‖f‖_p` for explicit test functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Strategy;
use crate::grid::{lp_norm, weighted_lp_norm, GridFunction};
use crate::norms::symmetric::SymmetricOperator;
use crate::operators::{average_with, ArithmeticMeasure, Budget, Path};

#[derive(Clone, Debug, PartialEq)]
pub enum Probe {
    Delta,
    /// Indicator of `{|x| ≤ R}`.
    Ball(u64),
    Custom(GridFunction),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeKind {
    Delta,
    Ball,
}

impl Probe {
    pub fn name(&self) -> String {
        match self {
            Probe::Delta => "delta".into(),
            Probe::Ball(r) => format!("ball({r})"),
            Probe::Custom(_) => "custom".into(),
        }
    }
}

/// `⌈√λ⌉`, the radius of the ball probe.
pub fn ball_radius(lambda: u64) -> u64 {
    let r = crate::multiplier::isqrt(lambda);
    if r * r == lambda {
        r
    } else {
        r + 1
    }
}

/// `‖A_λ f‖_q / ‖f‖_p`, a lower bound for the `ℓ^p → ℓ^q` norm.
///
/// Balls go through the orbit-reduced operator when the shell is symmetric.
pub fn probe_ratio(
    probe: &Probe,
    mu: &ArithmeticMeasure,
    p: f64,
    q: f64,
    strategy: Strategy,
    budget: Budget,
) -> Result<f64> {
    crate::grid::check_exponent(p)?;
    crate::grid::check_exponent(q)?;
    let f = match probe {
        Probe::Delta => GridFunction::delta(mu.dim()),
        Probe::Ball(r) if mu.shell().form().degree().is_multiple_of(2) => {
            let op = SymmetricOperator::new(mu, *r, strategy, budget)?;
            let f = op.input().ball(*r);
            let num = weighted_lp_norm(&op.apply(&f), op.output().weights(), q)?;
            return Ok(num / weighted_lp_norm(&f, op.input().weights(), p)?);
        }
        Probe::Ball(r) => GridFunction::ball_indicator(mu.dim(), *r),
        Probe::Custom(g) => g.clone(),
    };
    let den = lp_norm(&f, p)?;
    if den == 0.0 {
        return Err(Error::Precondition("the probe is identically zero".into()));
    }
    let af = average_with(&f, mu, Path::Sparse, strategy, budget)?;
    Ok(lp_norm(&af, q)? / den)
}

/// `N^{1/q - 1}`, the delta ratio.
pub fn delta_ratio(count: u128, q: f64) -> f64 {
    let inv_q = if q.is_infinite() { 0.0 } else { 1.0 / q };
    (count as f64).powf(inv_q - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{enumerate_shell, DiagonalForm};

    fn measure(d: usize, lambda: u64) -> ArithmeticMeasure {
        let form = DiagonalForm::sphere(d).unwrap();
        ArithmeticMeasure::new(enumerate_shell(form, lambda, 1 << 20).unwrap()).unwrap()
    }

    #[test]
    fn delta_closed_form() {
        let mu = measure(4, 25);
        for (p, q) in [
            (1.0, f64::INFINITY),
            (1.5, 3.0),
            (2.0, 2.0),
            (5.0 / 3.0, 2.5),
        ] {
            let r = probe_ratio(
                &Probe::Delta,
                &mu,
                p,
                q,
                Strategy::Sequential,
                Budget::default(),
            )
            .unwrap();
            let want = delta_ratio(mu.count() as u128, q);
            assert!((r - want).abs() <= 1e-12 * want);
        }
    }

    #[test]
    fn translated_point_is_a_delta() {
        let mu = measure(4, 9);
        let mut g = GridFunction::zeros(crate::grid::BoxSpec::new(3, vec![1, -2, 0, 5]));
        g.set(&[2, -1, 1, 6], 1.0).unwrap();
        let s = Strategy::Sequential;
        let a = probe_ratio(&Probe::Custom(g), &mu, 1.5, 3.0, s, Budget::default()).unwrap();
        let b = probe_ratio(&Probe::Delta, &mu, 1.5, 3.0, s, Budget::default()).unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn symmetric_ball_matches_the_grid_ball() {
        let mu = measure(4, 10);
        let s = Strategy::Sequential;
        let fast = probe_ratio(&Probe::Ball(4), &mu, 1.5, 3.0, s, Budget::default()).unwrap();
        let grid = Probe::Custom(GridFunction::ball_indicator(4, 4));
        let slow = probe_ratio(&grid, &mu, 1.5, 3.0, s, Budget::default()).unwrap();
        assert!((fast - slow).abs() < 1e-12 * slow);
    }

    #[test]
    fn ball_probe_tracks_the_predicted_rate() {
        let mu = measure(4, 49);
        for p in [1.8, 2.0] {
            let q = p / (p - 1.0);
            let r = probe_ratio(
                &Probe::Ball(ball_radius(49)),
                &mu,
                p,
                q,
                Strategy::Parallel,
                Budget::default(),
            )
            .unwrap();
            let pred = 49f64.powf(-2.0 * (2.0 / p - 1.0));
            assert!(r / pred < 4.0 && pred / r < 4.0, "p={p}: {r} vs {pred}");
        }
    }
}
