//! Complete exponential sums: Ramanujan, normalized Gauss and Kloosterman/Salié sums.
//!
//! Throughout, `e(t) = exp(-2πi t)`. Every sum here is a sum of roots of unity of a
//! fixed modulus `q`, so phases are reduced to an integer residue `j mod q` first and
//! then read from a [`RootTable`].

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Strategy;
use crate::lattice::DiagonalForm;
use crate::number::{divisors, gcd, gcd_signed, mobius, rem, units};

/// The character `e(t) = exp(-2πi t)`.
pub fn e(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, -TAU * t)
}

/// `e(j/q)` for `j = 0..q`.
#[derive(Clone, Debug)]
pub struct RootTable {
    q: u64,
    roots: Vec<Complex64>,
}

impl RootTable {
    pub fn new(q: u64) -> Self {
        assert!(q >= 1, "modulus must be positive");
        let roots = (0..q)
            .map(|j| {
                // reduce to the nearest quarter turn for a symmetric, exact-at-axes table
                let t = j as f64 / q as f64;
                e(if t > 0.5 { t - 1.0 } else { t })
            })
            .collect();
        RootTable { q, roots }
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// `e(j/q)` for any signed `j`.
    pub fn at(&self, j: i128) -> Complex64 {
        self.roots[j.rem_euclid(self.q as i128) as usize]
    }

    pub fn at_residue(&self, j: u64) -> Complex64 {
        self.roots[j as usize]
    }
}

fn pow_mod(base: u64, exp: u32, q: u64) -> u64 {
    let q = q as u128;
    let mut acc = 1u128 % q;
    let mut b = base as u128 % q;
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % q;
        }
        b = b * b % q;
        e >>= 1;
    }
    acc as u64
}

/// Ramanujan's sum `c_q(N) = Σ_{a ∈ (Z/q)^×} e(aN/q)` via `Σ_{d | (q,N)} d μ(q/d)`.
pub fn ramanujan(q: u64, n: i64) -> i64 {
    assert!(q >= 1, "modulus must be positive");
    let g = gcd_signed(q, n);
    divisors(g)
        .into_iter()
        .map(|d| d as i64 * mobius(q / d))
        .sum()
}

/// One coordinate of the Gauss sum: `q^{-1} Σ_{b mod q} e((a b^k + b m)/q)`.
pub fn gauss_sum_1d(k: u32, a: i64, q: u64, m: i64, roots: &RootTable) -> Complex64 {
    debug_assert_eq!(roots.modulus(), q);
    let a = rem(a, q);
    let m = rem(m, q);
    let mut s = Complex64::new(0.0, 0.0);
    for b in 0..q {
        let j = (a as u128 * pow_mod(b, k, q) as u128 + b as u128 * m as u128) % q as u128;
        s += roots.at_residue(j as u64);
    }
    s / q as f64
}

/// The normalized Gauss sum `G(a,q;m) = q^{-d} Σ_{b ∈ (Z/q)^d} e((aF(b) + b·m)/q)`,
/// evaluated as a product of one-dimensional sums.
pub fn gauss_sum(form: DiagonalForm, a: i64, q: u64, m: &[i64]) -> Complex64 {
    assert_eq!(m.len(), form.dimension(), "frequency has wrong dimension");
    let roots = RootTable::new(q);
    m.iter()
        .map(|&mi| gauss_sum_1d(form.degree(), a, q, mi, &roots))
        .product()
}

/// The Kloosterman/Salié sum `K(q,λ;m) = Σ_{a ∈ (Z/q)^×} e(-aλ/q) G(a,q;m)`.
pub fn kloosterman(form: DiagonalForm, q: u64, lambda: i64, m: &[i64]) -> Complex64 {
    assert_eq!(m.len(), form.dimension(), "frequency has wrong dimension");
    let roots = RootTable::new(q);
    let k = form.degree();
    units(q)
        .into_iter()
        .map(|a| {
            let phase = roots.at(-(a as i128) * lambda as i128);
            let g: Complex64 = m
                .iter()
                .map(|&mi| gauss_sum_1d(k, a as i64, q, mi, &roots))
                .product();
            phase * g
        })
        .sum()
}

/// All one-dimensional Gauss sums `g(a,q;m)` for a fixed modulus, `a` over the units.
///
/// Row `i` corresponds to `units[i]`, column `m` to the residue `m mod q`. Each row is
/// the DFT of `b -> e(a b^k / q)`.
#[derive(Clone, Debug)]
pub struct GaussTable {
    q: u64,
    units: Vec<u64>,
    values: Vec<Complex64>,
}

impl GaussTable {
    pub fn new(k: u32, q: u64) -> Self {
        Self::with_planner(k, q, &mut FftPlanner::new())
    }

    pub fn with_planner(k: u32, q: u64, planner: &mut FftPlanner<f64>) -> Self {
        let roots = RootTable::new(q);
        let units = units(q);
        let n = q as usize;
        let fft: Arc<dyn rustfft::Fft<f64>> = planner.plan_fft_forward(n);
        let powers: Vec<u64> = (0..q).map(|b| pow_mod(b, k, q)).collect();
        let mut values = Vec::with_capacity(units.len() * n);
        for &a in &units {
            let mut row: Vec<Complex64> = powers
                .iter()
                .map(|&p| roots.at_residue(((a as u128 * p as u128) % q as u128) as u64))
                .collect();
            // forward DFT: Σ_b x_b exp(-2πi bm/q) = Σ_b x_b e(bm/q)
            fft.process(&mut row);
            values.extend(row.into_iter().map(|v| v / q as f64));
        }
        GaussTable { q, units, values }
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn units(&self) -> &[u64] {
        &self.units
    }

    /// `g(units[unit_index], q; m)`.
    pub fn get(&self, unit_index: usize, m: i64) -> Complex64 {
        self.values[unit_index * self.q as usize + rem(m, self.q) as usize]
    }

    pub fn row(&self, unit_index: usize) -> &[Complex64] {
        let n = self.q as usize;
        &self.values[unit_index * n..(unit_index + 1) * n]
    }
}

/// Evaluates `K(q,λ;m)` for many `m` at fixed `q`, `λ`.
#[derive(Clone, Debug)]
pub struct KloostermanTable {
    gauss: GaussTable,
    phases: Vec<Complex64>,
}

impl KloostermanTable {
    pub fn new(form: DiagonalForm, q: u64, lambda: i64) -> Self {
        let gauss = GaussTable::new(form.degree(), q);
        let roots = RootTable::new(q);
        let phases = gauss
            .units()
            .iter()
            .map(|&a| roots.at(-(a as i128) * lambda as i128))
            .collect();
        KloostermanTable { gauss, phases }
    }

    pub fn modulus(&self) -> u64 {
        self.gauss.modulus()
    }

    pub fn eval(&self, m: &[i64]) -> Complex64 {
        let q = self.gauss.modulus();
        let mut stack = [0usize; 16];
        let mut heap = Vec::new();
        let idx: &mut [usize] = if m.len() <= stack.len() {
            &mut stack[..m.len()]
        } else {
            heap.resize(m.len(), 0);
            &mut heap
        };
        for (slot, &v) in idx.iter_mut().zip(m) {
            *slot = rem(v, q) as usize;
        }
        self.phases
            .iter()
            .enumerate()
            .map(|(i, &ph)| {
                let row = self.gauss.row(i);
                ph * idx.iter().map(|&j| row[j]).product::<Complex64>()
            })
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeilRow {
    pub q: u64,
    pub ratio: f64,
    pub gcd: u64,
    pub abs_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeilScan {
    pub rows: Vec<WeilRow>,
    pub max_ratio: f64,
    /// Least-squares slope of log(running max ratio) against log q.
    pub growth_exponent: f64,
}

impl WeilScan {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("q,ratio,gcd,abs_value\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{:.12e},{},{:.12e}\n",
                r.q, r.ratio, r.gcd, r.abs_value
            ));
        }
        s
    }
}

/// Tabulates `|K(q,λ;m)| q^{(d-1)/2} / (q,λ)^{1/2}` for `q = 1..=q_max`.
pub fn weil_ratio_scan(
    form: DiagonalForm,
    q_max: u64,
    lambda: i64,
    m: &[i64],
    strategy: Strategy,
) -> Result<WeilScan> {
    if !form.is_sphere() {
        return Err(Error::Precondition("the Weil scan needs k = 2".into()));
    }
    if q_max < 1 {
        return Err(Error::Precondition("q_max must be at least 1".into()));
    }
    let d = form.dimension() as f64;
    let qs: Vec<u64> = (1..=q_max).collect();
    let rows = strategy.map(&qs, |&q| {
        let k = KloostermanTable::new(form, q, lambda).eval(m);
        let g = gcd_signed(q, lambda);
        let abs_value = k.norm();
        WeilRow {
            q,
            ratio: abs_value * (q as f64).powf((d - 1.0) / 2.0) / (g as f64).sqrt(),
            gcd: g,
            abs_value,
        }
    });
    let mut running = 0.0f64;
    let envelope: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| {
            running = running.max(r.ratio);
            (r.q as f64, running)
        })
        .collect();
    let max_ratio = running;
    let growth_exponent = if envelope.len() >= 2 && max_ratio > 0.0 {
        let pts: Vec<(f64, f64)> = envelope
            .iter()
            .filter(|(_, v)| *v > 0.0)
            .map(|&(q, v)| (q.ln(), v.ln()))
            .collect();
        crate::norms::fit::least_squares(&pts)
            .map(|f| f.0)
            .unwrap_or(0.0)
    } else {
        0.0
    };
    Ok(WeilScan {
        rows,
        max_ratio,
        growth_exponent,
    })
}

/// `|Σ_{b ∈ (Z/q)^d} G(a,q;b) e(-b·x/q) - e(aF(x)/q)|`.
///
/// The left side is summed coordinatewise: both `G` and the character factor over
/// coordinates, so the `q^d`-term sum is a product of `d` sums of `q` terms.
pub fn dual_identity_check(form: DiagonalForm, a: i64, q: u64, x: &[i64]) -> Result<f64> {
    if gcd(rem(a, q), q) != 1 {
        return Err(Error::Precondition(format!("gcd(a={a}, q={q}) must be 1")));
    }
    assert_eq!(x.len(), form.dimension(), "point has wrong dimension");
    let roots = RootTable::new(q);
    let k = form.degree();
    let lhs: Complex64 = x
        .iter()
        .map(|&xi| {
            (0..q as i64)
                .map(|b| gauss_sum_1d(k, a, q, b, &roots) * roots.at(-(b as i128) * xi as i128))
                .sum::<Complex64>()
        })
        .product();
    let fx = x
        .iter()
        .map(|&xi| pow_mod(rem(xi, q), k, q) as u128)
        .sum::<u128>()
        % q as u128;
    let rhs = roots.at(rem(a, q) as i128 * fx as i128);
    Ok((lhs - rhs).norm())
}

/// Observed constant in `|G(a,q;m)| <= C q^{-d/k}` (Steckin, `k >= 3`) or
/// `|G(a,q;m)| <= C q^{-d/2}` (Gauss, `k = 2`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussBoundScan {
    pub exponent: f64,
    pub constant: f64,
    /// Modulus attaining the one-dimensional maximum.
    pub argmax_q: u64,
}

/// Scans `q <= q_max`, all units `a` and all `m`, using `|G| = Π_i |g(a,q;m_i)|`.
pub fn gauss_bound_scan(form: DiagonalForm, q_max: u64, strategy: Strategy) -> GaussBoundScan {
    let k = form.degree();
    let per_coord = 1.0 / k as f64;
    let qs: Vec<u64> = (1..=q_max).collect();
    let best = strategy.map(&qs, |&q| {
        let t = GaussTable::new(k, q);
        let max = t.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        (max * (q as f64).powf(per_coord), q)
    });
    let (c1, argmax_q) = best
        .into_iter()
        .fold((0.0, 1), |acc, v| if v.0 > acc.0 + 1e-12 { v } else { acc });
    GaussBoundScan {
        exponent: form.dimension() as f64 / k as f64,
        constant: c1.powi(form.dimension() as i32),
        argmax_q,
    }
}
