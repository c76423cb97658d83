//! Lattice points on the level sets `F(y) = λ` of diagonal forms `F(y) = Σ |y_i|^k`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Strategy;

/// The form `F(x) = |x_1|^k + ... + |x_d|^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiagonalForm {
    d: usize,
    k: u32,
}

impl DiagonalForm {
    pub fn new(d: usize, k: u32) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidForm(format!(
                "dimension d={d} must be at least 2"
            )));
        }
        if k < 2 {
            return Err(Error::InvalidForm(format!(
                "degree k={k} must be at least 2"
            )));
        }
        Ok(DiagonalForm { d, k })
    }

    /// Sum of squares in `d` variables.
    pub fn sphere(d: usize) -> Result<Self> {
        Self::new(d, 2)
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn is_sphere(&self) -> bool {
        self.k == 2
    }

    /// `F(x)`; saturates at `u128::MAX`.
    pub fn eval(&self, x: &[i64]) -> u128 {
        x.iter().fold(0u128, |acc, &v| {
            let p = (v.unsigned_abs() as u128).saturating_pow(self.k);
            acc.saturating_add(p)
        })
    }

    /// Largest `t >= 0` with `t^k <= lambda`.
    pub fn coordinate_bound(&self, lambda: u64) -> u64 {
        let mut t = (lambda as f64).powf(1.0 / self.k as f64).floor() as u64;
        while t > 0 && pow_u128(t, self.k) > lambda as u128 {
            t -= 1;
        }
        while pow_u128(t + 1, self.k) <= lambda as u128 {
            t += 1;
        }
        t
    }

    /// `t^k` for `t = 0..=coordinate_bound(lambda)`.
    fn power_table(&self, lambda: u64) -> Vec<u64> {
        (0..=self.coordinate_bound(lambda))
            .map(|t| pow_u128(t, self.k) as u64)
            .collect()
    }
}

impl fmt::Display for DiagonalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d={} k={}", self.d, self.k)
    }
}

fn pow_u128(t: u64, k: u32) -> u128 {
    (t as u128).saturating_pow(k)
}

/// The solutions of `F(y) = λ`, in lexicographic order when materialized.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SphereShell {
    form: DiagonalForm,
    lambda: u64,
    count: u128,
    /// Flattened points, `d` coordinates each.
    points: Option<Vec<i64>>,
}

impl SphereShell {
    pub(crate) fn from_parts(
        form: DiagonalForm,
        lambda: u64,
        count: u128,
        points: Option<Vec<i64>>,
    ) -> Self {
        SphereShell {
            form,
            lambda,
            count,
            points,
        }
    }

    pub fn form(&self) -> DiagonalForm {
        self.form
    }

    pub fn lambda(&self) -> u64 {
        self.lambda
    }

    pub fn count(&self) -> u128 {
        self.count
    }

    pub fn is_full(&self) -> bool {
        self.points.is_some()
    }

    /// Iterator over the points (empty in count-only mode).
    pub fn points(&self) -> impl ExactSizeIterator<Item = &[i64]> + '_ {
        self.points
            .as_deref()
            .unwrap_or(&[])
            .chunks_exact(self.form.d)
    }

    pub fn flat_points(&self) -> Option<&[i64]> {
        self.points.as_deref()
    }

    /// Largest coordinate magnitude any shell point can have.
    pub fn radius(&self) -> u64 {
        self.form.coordinate_bound(self.lambda)
    }
}

/// All integer solutions of `F(y) = λ`, each once, in lexicographic order.
///
/// Fails with [`Error::ShellBudget`] when the shell has more than `cap` points; the
/// error carries the exact count so callers can fall back to [`count_shell`].
pub fn enumerate_shell(form: DiagonalForm, lambda: u64, cap: usize) -> Result<SphereShell> {
    enumerate_shell_with(form, lambda, cap, Strategy::default())
}

pub fn enumerate_shell_with(
    form: DiagonalForm,
    lambda: u64,
    cap: usize,
    strategy: Strategy,
) -> Result<SphereShell> {
    let count = count_shell(form, lambda)?;
    if count > cap as u128 {
        return Err(Error::ShellBudget {
            d: form.d,
            k: form.k,
            lambda,
            count,
            cap,
        });
    }
    let powers = form.power_table(lambda);
    let t = powers.len() as i64 - 1;
    let firsts: Vec<i64> = (-t..=t).collect();
    let blocks = strategy.map(&firsts, |&x0| {
        let used = powers[x0.unsigned_abs() as usize];
        let mut out = Vec::new();
        let mut prefix = vec![x0];
        descend(&powers, form.d, lambda - used, &mut prefix, &mut out);
        out
    });
    let points: Vec<i64> = blocks.concat();
    debug_assert_eq!(points.len() as u128, count * form.d as u128);
    Ok(SphereShell {
        form,
        lambda,
        count,
        points: Some(points),
    })
}

fn descend(powers: &[u64], d: usize, rem: u64, prefix: &mut Vec<i64>, out: &mut Vec<i64>) {
    let left = d - prefix.len();
    if left == 0 {
        if rem == 0 {
            out.extend_from_slice(prefix);
        }
        return;
    }
    if left == 1 {
        if let Ok(t) = powers.binary_search(&rem) {
            let t = t as i64;
            if t == 0 {
                out.extend_from_slice(prefix);
                out.push(0);
            } else {
                for v in [-t, t] {
                    out.extend_from_slice(prefix);
                    out.push(v);
                }
            }
        }
        return;
    }
    let t = powers.partition_point(|&p| p <= rem) as i64 - 1;
    for x in -t..=t {
        prefix.push(x);
        descend(
            powers,
            d,
            rem - powers[x.unsigned_abs() as usize],
            prefix,
            out,
        );
        prefix.pop();
    }
}

/// `N_F(λ)` by exact dynamic programming over one-dimensional representation counts.
pub fn count_shell(form: DiagonalForm, lambda: u64) -> Result<u128> {
    Ok(count_table(form, lambda)?[lambda as usize])
}

/// `N_F(λ)` for every `λ` in `0..=lambda_max`.
pub fn count_table(form: DiagonalForm, lambda_max: u64) -> Result<Vec<u128>> {
    let n = lambda_max as usize + 1;
    let powers = form.power_table(lambda_max);
    // r1[j] = #{x in Z : |x|^k = j}
    let steps: Vec<(usize, u128)> = powers
        .iter()
        .map(|&p| (p as usize, if p == 0 { 1 } else { 2 }))
        .collect();
    let mut acc = vec![0u128; n];
    for &(p, w) in &steps {
        acc[p] = w;
    }
    for _ in 1..form.d {
        let mut next = vec![0u128; n];
        for (j, slot) in next.iter_mut().enumerate() {
            let mut s = 0u128;
            for &(p, w) in &steps {
                if p > j {
                    break;
                }
                let term = acc[j - p]
                    .checked_mul(w)
                    .ok_or_else(|| Error::Overflow(format!("counting N({j})")))?;
                s = s
                    .checked_add(term)
                    .ok_or_else(|| Error::Overflow(format!("counting N({j})")))?;
            }
            *slot = s;
        }
        acc = next;
    }
    Ok(acc)
}

/// One entry of [`regular_values`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegularValue {
    pub lambda: u64,
    pub count: u128,
    /// Whether `100^{-1} λ^{(d-2)/2} <= N <= 100 λ^{(d-2)/2}` holds. `None` where the
    /// two-sided bound is not expected (non-sphere forms, `d < 4`, even `λ` for `d = 4`).
    pub within_bound: Option<bool>,
}

/// Every `1 <= λ <= lambda_max` with `N_F(λ) > 0`.
pub fn regular_values(form: DiagonalForm, lambda_max: u64) -> Result<Vec<RegularValue>> {
    if lambda_max < 1 {
        return Err(Error::Precondition("lambda_max must be at least 1".into()));
    }
    let table = count_table(form, lambda_max)?;
    let mut out = Vec::new();
    for (lambda, &count) in table.iter().enumerate().skip(1) {
        if count == 0 {
            continue;
        }
        let lambda = lambda as u64;
        let expected = form.is_sphere() && (form.d >= 5 || (form.d == 4 && lambda % 2 == 1));
        let within_bound = if expected {
            Some(two_sided_bound_holds(form.d, lambda, count)?)
        } else {
            None
        };
        out.push(RegularValue {
            lambda,
            count,
            within_bound,
        });
    }
    Ok(out)
}

/// Exact check of `100^{-1} λ^{(d-2)/2} <= N <= 100 λ^{(d-2)/2}`, by squaring:
/// `λ^{d-2} <= 10^4 N^2` and `N^2 <= 10^4 λ^{d-2}`.
pub fn two_sided_bound_holds(d: usize, lambda: u64, count: u128) -> Result<bool> {
    let overflow = || Error::Overflow(format!("bounding N at d={d} lambda={lambda}"));
    let lam_pow = (lambda as u128)
        .checked_pow(d as u32 - 2)
        .ok_or_else(overflow)?;
    let n2 = count.checked_mul(count).ok_or_else(overflow)?;
    let lower = lam_pow <= n2.checked_mul(10_000).ok_or_else(overflow)?;
    let upper = n2 <= lam_pow.checked_mul(10_000).ok_or_else(overflow)?;
    Ok(lower && upper)
}
