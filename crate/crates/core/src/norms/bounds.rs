//! Closed-form exponents and bounds, in exact rational arithmetic.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::DiagonalForm;

pub type Q = Ratio<i64>;

fn q(n: i64) -> Q {
    Q::from_integer(n)
}

/// Parses `"5/3"`, `"3"` or a decimal. Decimals with up to three places are
/// exact (`"1.25"` is 5/4); longer ones are read as rounded and become the
/// simplest rational that rounds to them (`"1.6667"` is 5/3).
pub fn parse_exponent(s: &str) -> Result<Q> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: i64 = a
            .trim()
            .parse()
            .map_err(|e| Error::InvalidExponent(format!("{s}: {e}")))?;
        let b: i64 = b
            .trim()
            .parse()
            .map_err(|e| Error::InvalidExponent(format!("{s}: {e}")))?;
        if b == 0 {
            return Err(Error::InvalidExponent(format!("{s}: zero denominator")));
        }
        return Ok(Q::new(a, b));
    }
    if let Ok(n) = s.parse::<i64>() {
        return Ok(q(n));
    }
    let x: f64 = s
        .parse()
        .map_err(|e| Error::InvalidExponent(format!("{s}: {e}")))?;
    let digits = s.split_once('.').map_or(0, |(_, f)| f.len()) as i32;
    if digits <= 3 {
        let scale = 10i64.pow(digits as u32);
        let n = (x * scale as f64).round();
        if n.abs() < 1e15 {
            return Ok(Q::new(n as i64, scale));
        }
    }
    rational_near(x, 0.5 * 10f64.powi(-digits))
        .ok_or_else(|| Error::InvalidExponent(format!("{s} is not finite")))
}

/// First continued-fraction convergent within `tol` of `x`, with denominator
/// at most 10^6.
pub fn rational_near(x: f64, tol: f64) -> Option<Q> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1, mut k0, mut k1) = (0i64, 1i64, 1i64, 0i64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        let (h2, k2) = (a as i64 * h1 + h0, a as i64 * k1 + k0);
        if k2 > 1_000_000 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a;
        if frac.abs() < 1e-12 || (h1 as f64 / k1 as f64 - x).abs() <= tol {
            break;
        }
        r = 1.0 / frac;
    }
    Some(Q::new(h1, k1))
}

pub fn to_f64(r: Q) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn check_unit_interval(p: Q) -> Result<()> {
    if p < q(1) || p > q(2) {
        return Err(Error::InvalidExponent(format!("p={p} must lie in [1, 2]")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BirchParameters {
    pub d: usize,
    pub k: u32,
    pub alpha: Q,
    pub beta: Q,
    pub gamma: Q,
}

/// `α = d/k - 1`, `β = (d-2)/k`, `γ = (1/6k)(d/((k-1)2^k) - 1)` for a
/// diagonal form, whose singular locus is `{0}`.
pub fn birch_parameters(form: DiagonalForm) -> Result<BirchParameters> {
    let d = form.dimension();
    let k = form.degree();
    let bound = 1i64
        .checked_shl(k)
        .filter(|v| *v > 0)
        .and_then(|p| p.checked_mul(k as i64 - 1))
        .ok_or_else(|| Error::Overflow(format!("(k-1)2^k for k={k}")))?;
    if (d as i64) <= bound {
        return Err(Error::BirchCriterion {
            d,
            k,
            bound: bound as u64,
        });
    }
    Ok(substitute(d, k, bound))
}

/// The same formulas without the criterion check (so `γ` may be negative).
pub fn substitute_parameters(form: DiagonalForm) -> Result<BirchParameters> {
    let k = form.degree();
    let bound = 1i64
        .checked_shl(k)
        .filter(|v| *v > 0)
        .and_then(|p| p.checked_mul(k as i64 - 1))
        .ok_or_else(|| Error::Overflow(format!("(k-1)2^k for k={k}")))?;
    Ok(substitute(form.dimension(), k, bound))
}

fn substitute(d: usize, k: u32, bound: i64) -> BirchParameters {
    let (di, ki) = (d as i64, k as i64);
    BirchParameters {
        d,
        k,
        alpha: Q::new(di, ki) - 1,
        beta: Q::new(di - 2, ki),
        gamma: Q::new(1, 6 * ki) * (Q::new(di, bound) - 1),
    }
}

/// `η_{F,p} = min{β(2/p - 1), α(2/p - 1) + γ(2 - 2/p)}`.
pub fn eta(params: &BirchParameters, p: Q) -> Result<Q> {
    check_unit_interval(p)?;
    Ok(two_branches(params.alpha, params.beta, params.gamma, p))
}

fn two_branches(alpha: Q, beta: Q, gamma: Q, p: Q) -> Q {
    let s = q(2) / p - 1;
    let t = q(2) - q(2) / p;
    (beta * s).min(alpha * s + gamma * t)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterpolationBound {
    /// Decay exponent of `λ^{-β(2/p-1)} + λ^{-[α(2/p-1)+γ(2-2/p)]}`.
    pub exponent: Q,
    /// Set when the hypothesis `α < β` fails.
    pub warning: Option<String>,
}

/// Exponent obtained by interpolating the `ℓ^1 → ℓ^∞` and `ℓ^2 → ℓ^2` bounds.
pub fn interpolation_bound(alpha: Q, beta: Q, gamma: Q, p: Q) -> Result<InterpolationBound> {
    check_unit_interval(p)?;
    let warning = (alpha >= beta).then(|| format!("alpha={alpha} is not below beta={beta}"));
    Ok(InterpolationBound {
        exponent: two_branches(alpha, beta, gamma, p),
        warning,
    })
}

/// `β_F (2/p - 1)`; for the sphere this is `((d-2)/2)(2/p - 1)`.
pub fn trivial_bound_exponent(form: DiagonalForm, p: Q) -> Result<Q> {
    check_unit_interval(p)?;
    Ok(Q::new(form.dimension() as i64 - 2, form.degree() as i64) * (q(2) / p - 1))
}

/// `(d/2)(2/p - 1)` for `(d+1)/(d-1) ≤ p ≤ 2`.
pub fn theorem_exponent(d: usize, p: Q) -> Result<Q> {
    let di = d as i64;
    if d < 2 {
        return Err(Error::Precondition("d must be at least 2".into()));
    }
    let lo = Q::new(di + 1, di - 1);
    if p < lo || p > q(2) {
        return Err(Error::InvalidExponent(format!(
            "p={p} must lie in [{lo}, 2]"
        )));
    }
    Ok(Q::new(di, 2) * (q(2) / p - 1))
}

/// `100 λ^{-((d-2)/2)(2/p-1)}`, the trivial `ℓ^p → ℓ^{p'}` bound for the sphere
/// with the constant 100.
pub fn trivial_bound_value(d: usize, lambda: u64, p: f64) -> f64 {
    100.0 * (lambda as f64).powf(-((d as f64 - 2.0) / 2.0) * (2.0 / p - 1.0))
}

/// `S^{1 - 2/p}`.
pub fn young_baseline(support: u64, p: f64) -> Result<f64> {
    if support == 0 {
        return Err(Error::Precondition("support size must be positive".into()));
    }
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::InvalidExponent(format!("p={p} must lie in [1, 2]")));
    }
    Ok((support as f64).powf(1.0 - 2.0 / p))
}

/// `p' = p/(p-1)`, infinite at `p = 1`.
pub fn dual_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}
