//! The major-arc main term `M̂_λ` and its low/high frequency split.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{count_shell, DiagonalForm};
use crate::multiplier::bump::{psi, psi_d};
use crate::special::{half_sphere_area, sphere_ft};
use crate::sums::KloostermanTable;

/// Overall scale of the main term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// The bare sum; the `q = 1` term is exactly 1 at `ξ = 0`.
    Unit,
    /// Scaled by `ω_d λ^{d/2-1} / N(λ)`, the factor that makes `M̂_λ`
    /// approximate `σ̂_λ` itself rather than `σ̂_λ` times the singular series.
    ShellCount,
}

/// `Λ = 2^j` with `2^{j-1} ≤ λ < 2^j`.
pub fn dyadic_cutoff(lambda: u64) -> u64 {
    assert!(lambda >= 1);
    1u64 << (64 - lambda.leading_zeros())
}

/// `floor(sqrt(n))`.
pub fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// The unique `m` with `qξ - m ∈ (-1/4, 1/4)^d`, and the offsets `qξ - m`.
pub fn nearest_arc(q: u64, xi: &[f64]) -> Option<(Vec<i64>, Vec<f64>)> {
    let mut m = Vec::with_capacity(xi.len());
    let mut u = Vec::with_capacity(xi.len());
    for &x in xi {
        let t = q as f64 * x;
        let r = t.round();
        let off = t - r;
        if off.abs() >= 0.25 {
            return None;
        }
        m.push(r as i64);
        u.push(off);
    }
    Some((m, u))
}

#[derive(Clone, Debug)]
pub struct MainTerm {
    form: DiagonalForm,
    lambda: u64,
    cutoff: u64,
    scale: f64,
    tables: Vec<KloostermanTable>,
}

impl MainTerm {
    pub fn new(form: DiagonalForm, lambda: u64, normalization: Normalization) -> Result<Self> {
        if !form.is_sphere() {
            return Err(Error::Precondition(
                "the main term is implemented for the sphere (k = 2) only".into(),
            ));
        }
        if lambda == 0 {
            return Err(Error::Precondition("lambda must be positive".into()));
        }
        let cutoff = dyadic_cutoff(lambda);
        let q_max = isqrt(cutoff);
        let d = form.dimension();
        let scale = match normalization {
            Normalization::Unit => 1.0,
            Normalization::ShellCount => {
                let n = count_shell(form, lambda)?;
                if n == 0 {
                    return Err(Error::Precondition(format!(
                        "lambda={lambda} has no representations"
                    )));
                }
                half_sphere_area(d) * (lambda as f64).powf(d as f64 / 2.0 - 1.0) / n as f64
            }
        };
        let tables = (1..=q_max)
            .map(|q| KloostermanTable::new(form, q, lambda as i64))
            .collect();
        Ok(MainTerm {
            form,
            lambda,
            cutoff,
            scale,
            tables,
        })
    }

    pub fn lambda(&self) -> u64 {
        self.lambda
    }

    /// The dyadic `Λ`.
    pub fn cutoff(&self) -> u64 {
        self.cutoff
    }

    /// Largest modulus in the sum, `floor(Λ^{1/2})`.
    pub fn q_max(&self) -> u64 {
        self.tables.len() as u64
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `K(q,λ;m)` for `q ≤ q_max`.
    pub fn kloosterman(&self, q: u64, m: &[i64]) -> Complex64 {
        self.tables[q as usize - 1].eval(m)
    }

    /// The `q` term: `K(q,λ;m) Ψ(qξ - m) σ̃(√λ |ξ - m/q|)`, unscaled.
    pub fn term(&self, q: u64, xi: &[f64]) -> Complex64 {
        match nearest_arc(q, xi) {
            None => Complex64::default(),
            Some((m, u)) => {
                let dist = u.iter().map(|v| v * v).sum::<f64>().sqrt() / q as f64;
                let w = psi_d(&u)
                    * sphere_ft(self.form.dimension(), (self.lambda as f64).sqrt() * dist);
                if w == 0.0 {
                    Complex64::default()
                } else {
                    self.kloosterman(q, &m) * w
                }
            }
        }
    }

    pub fn eval(&self, xi: &[f64]) -> Complex64 {
        let s: Complex64 = (1..=self.q_max()).map(|q| self.term(q, xi)).sum();
        s * self.scale
    }

    /// Splits the `q ∈ [2^j, 2^{j+1})` block (capped at `q_max`) into the piece
    /// localized by `Ψ(2Δ√λ(ξ - m/q))` and the remainder.
    pub fn low_high_split(&self, j: u32, delta: f64, xi: &[f64]) -> Result<(Complex64, Complex64)> {
        let lo = 1u64 << j;
        let sqrt_l = (self.lambda as f64).sqrt();
        if lo > self.q_max() {
            return Err(Error::Regime(format!(
                "block 2^{j} starts beyond q_max = {}",
                self.q_max()
            )));
        }
        if !(delta >= lo as f64 && delta <= sqrt_l) {
            return Err(Error::Regime(format!(
                "need 2^j <= Delta <= sqrt(lambda), got 2^{j}={lo}, Delta={delta}, sqrt(lambda)={sqrt_l}"
            )));
        }
        let hi = ((lo << 1) - 1).min(self.q_max());
        let d = self.form.dimension();
        let mut low = Complex64::default();
        let mut block = Complex64::default();
        for q in lo..=hi {
            block += self.term(q, xi);
            if let Some((m, u)) = nearest_arc(q, xi) {
                let scale = 2.0 * delta * sqrt_l / q as f64;
                let loc: f64 = u.iter().map(|&v| psi(scale * v)).product();
                if loc != 0.0 {
                    let dist = u.iter().map(|v| v * v).sum::<f64>().sqrt() / q as f64;
                    low += self.kloosterman(q, &m) * (loc * sphere_ft(d, sqrt_l * dist));
                }
            }
        }
        Ok((low * self.scale, (block - low) * self.scale))
    }
}
