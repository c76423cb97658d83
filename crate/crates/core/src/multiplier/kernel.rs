//! Numerical check of the kernel identity for one major-arc piece.
//!
//! For `M̂^{a/q}(ξ) = Σ_m G(a,q;m) Ψ(qξ - m) σ̃(√λ (ξ - m/q))` the inverse
//! transform is
//!
//! ```text
//! L^{a/q}(x) = e(aF(x)/q) q^{-d} ∫_{S^{d-1}} Ψ̌((x - √λ y)/q) dσ(y).
//! ```
//!
//! The left side is computed from the multiplier: the torus integral splits
//! into the finite sum `Σ_b G(a,q;b) e(b·x/q)` times an integral over one arc,
//! done by tensor Gauss–Legendre on `[0, 1/4]^d`. The right side is a
//! quadrature over `S^3` in Hopf coordinates, where `Ψ̌` factors into two
//! circle integrals.

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::DiagonalForm;
use crate::multiplier::bump::{psi, PsiCheck, INNER, OUTER};
use crate::number::gcd;
use crate::quadrature::GaussLegendre;
use crate::special::sphere_ft;
use crate::sums::{e, GaussTable};

fn psi_check() -> &'static PsiCheck {
    static TABLE: OnceLock<PsiCheck> = OnceLock::new();
    TABLE.get_or_init(PsiCheck::new)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    /// Gauss–Legendre nodes per half of `[0, 1/4]` on the multiplier side.
    pub arc_nodes: usize,
    /// Gauss–Legendre nodes in the Hopf angle on the sphere side.
    pub sphere_nodes: usize,
    /// Largest node count either side may escalate to.
    pub max_nodes: usize,
    /// Agreement required between successive resolutions.
    pub self_tol: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            arc_nodes: 16,
            sphere_nodes: 128,
            max_nodes: 2048,
            self_tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelCheck {
    pub lhs: [f64; 2],
    pub rhs: [f64; 2],
    pub residual: f64,
    pub arc_nodes: usize,
    pub sphere_nodes: usize,
}

/// Precomputed arc integral `q^{-d} 2^d ∫ Π ψ(u_i) cos(2π x_i u_i / q) σ̃(√λ|u|/q) du`.
struct ArcIntegral {
    d: usize,
    q: u64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    radial: Vec<f64>,
}

impl ArcIntegral {
    fn new(d: usize, q: u64, lambda: u64, n: usize) -> Self {
        let g = GaussLegendre::new(n);
        let (mut nodes, mut weights) = g.on(0.0, INNER);
        let (n2, w2) = g.on(INNER, OUTER);
        nodes.extend(n2);
        weights.extend(w2);
        for (w, u) in weights.iter_mut().zip(&nodes) {
            *w *= psi(*u);
        }
        let m = nodes.len();
        let scale = (lambda as f64).sqrt() / q as f64;
        let radial = (0..m.pow(d as u32))
            .map(|mut idx| {
                let mut r2 = 0.0;
                for _ in 0..d {
                    let u = nodes[idx % m];
                    r2 += u * u;
                    idx /= m;
                }
                sphere_ft(d, scale * r2.sqrt())
            })
            .collect();
        ArcIntegral {
            d,
            q,
            nodes,
            weights,
            radial,
        }
    }

    fn eval(&self, x: &[i64]) -> f64 {
        let m = self.nodes.len();
        let mut acc = self.radial.clone();
        // contract the last axis first: radial is stored with axis 0 fastest
        for axis in (0..self.d).rev() {
            let c: Vec<f64> = self
                .nodes
                .iter()
                .zip(&self.weights)
                .map(|(u, w)| w * (TAU * x[axis] as f64 * u / self.q as f64).cos())
                .collect();
            let inner = acc.len() / m;
            acc = (0..inner)
                .map(|i| (0..m).map(|j| c[j] * acc[j * inner + i]).sum())
                .collect();
        }
        acc[0] * (2.0 / self.q as f64).powi(self.d as i32)
    }
}

/// `q^{-4} ∫_{S^3} Ψ̌((x - √λ y)/q) dσ(y)` in Hopf coordinates
/// `y = (cos α cos β, cos α sin β, sin α cos γ, sin α sin γ)`.
fn sphere_side(q: u64, lambda: u64, x: &[i64], n_alpha: usize) -> f64 {
    let table = psi_check();
    let g = GaussLegendre::new(n_alpha);
    let (alphas, wa) = g.on(0.0, PI / 2.0);
    let n_beta = 2 * n_alpha;
    let r = (lambda as f64).sqrt();
    let qf = q as f64;
    let circle = |rho: f64, x1: i64, x2: i64| -> f64 {
        let s: f64 = (0..n_beta)
            .map(|k| {
                let b = TAU * k as f64 / n_beta as f64;
                table.eval((x1 as f64 - rho * b.cos()) / qf)
                    * table.eval((x2 as f64 - rho * b.sin()) / qf)
            })
            .sum();
        s / n_beta as f64
    };
    let total: f64 = alphas
        .iter()
        .zip(&wa)
        .map(|(&al, &w)| {
            let (s, c) = al.sin_cos();
            w * s * c * 2.0 * circle(r * c, x[0], x[1]) * circle(r * s, x[2], x[3])
        })
        .sum();
    total / qf.powi(4)
}

/// `Σ_{b ∈ (Z/q)^d} G(a,q;b) e(b·x/q)`, coordinatewise.
fn arc_phase(gt: &GaussTable, unit_index: usize, x: &[i64]) -> Complex64 {
    let q = gt.modulus();
    x.iter()
        .map(|&xi| {
            gt.row(unit_index)
                .iter()
                .enumerate()
                .map(|(b, g)| {
                    g * e((b as i128 * xi as i128).rem_euclid(q as i128) as f64 / q as f64)
                })
                .sum::<Complex64>()
        })
        .product()
}

/// Both sides of the identity for fixed `(q, λ)`, reusable across `(a, x)`.
pub struct KernelIdentity {
    form: DiagonalForm,
    q: u64,
    lambda: u64,
    cfg: KernelConfig,
    gauss: GaussTable,
    arcs: Vec<ArcIntegral>,
}

impl KernelIdentity {
    pub fn new(form: DiagonalForm, q: u64, lambda: u64, cfg: KernelConfig) -> Result<Self> {
        if !form.is_sphere() || form.dimension() != 4 {
            return Err(Error::Precondition(
                "the kernel identity check is implemented for the d = 4 sphere".into(),
            ));
        }
        if q == 0 || lambda == 0 {
            return Err(Error::Precondition("q and lambda must be positive".into()));
        }
        let gauss = GaussTable::new(2, q);
        Ok(KernelIdentity {
            form,
            q,
            lambda,
            cfg,
            gauss,
            arcs: Vec::new(),
        })
    }

    fn arc(&mut self, n: usize) -> &ArcIntegral {
        if let Some(i) = self.arcs.iter().position(|a| a.nodes.len() == 2 * n) {
            return &self.arcs[i];
        }
        self.arcs.push(ArcIntegral::new(
            self.form.dimension(),
            self.q,
            self.lambda,
            n,
        ));
        self.arcs.last().expect("just pushed")
    }

    fn escalate<F: FnMut(usize) -> f64>(
        &self,
        start: usize,
        what: &str,
        mut f: F,
    ) -> Result<(f64, usize)> {
        let mut n = start;
        let mut prev = f(n);
        loop {
            let next_n = n + n / 2;
            if next_n > self.cfg.max_nodes {
                return Err(Error::Quadrature(format!(
                    "{what} did not settle to {} within {} nodes",
                    self.cfg.self_tol, self.cfg.max_nodes
                )));
            }
            let next = f(next_n);
            if (next - prev).abs() <= self.cfg.self_tol {
                return Ok((next, next_n));
            }
            n = next_n;
            prev = next;
        }
    }

    pub fn check(&mut self, a: i64, x: &[i64]) -> Result<KernelCheck> {
        let q = self.q;
        let d = self.form.dimension();
        if x.len() != d {
            return Err(Error::Precondition("x has the wrong dimension".into()));
        }
        let a_red = a.rem_euclid(q as i64) as u64;
        if gcd(a_red, q) != 1 {
            return Err(Error::Precondition(format!(
                "gcd(a, q) != 1 for a={a}, q={q}"
            )));
        }
        let unit_index = self
            .gauss
            .units()
            .iter()
            .position(|&u| u == a_red)
            .expect("a is a unit");
        let phase_lhs = arc_phase(&self.gauss, unit_index, x);
        let arc_max = ((1usize << 26) as f64).powf(1.0 / d as f64) as usize / 2;
        let cap = self.cfg.max_nodes.min(arc_max);
        let start = self.cfg.arc_nodes;
        let (arc_value, arc_nodes) = {
            let mut n = start;
            let mut prev = self.arc(n).eval(x);
            loop {
                let next_n = n + n / 2;
                if next_n > cap {
                    return Err(Error::Quadrature(format!(
                        "arc integral did not settle to {} within {cap} nodes",
                        self.cfg.self_tol
                    )));
                }
                let next = self.arc(next_n).eval(x);
                if (next - prev).abs() <= self.cfg.self_tol {
                    break (next, next_n);
                }
                n = next_n;
                prev = next;
            }
        };
        let (lambda, cfg_start) = (self.lambda, self.cfg.sphere_nodes);
        let (sphere_value, sphere_nodes) = self.escalate(cfg_start, "sphere quadrature", |n| {
            sphere_side(q, lambda, x, n)
        })?;
        let fx = self.form.eval(x);
        let phase_rhs = e(((a_red as u128 * fx) % q as u128) as f64 / q as f64);
        let lhs = phase_lhs * arc_value;
        let rhs = phase_rhs * sphere_value;
        Ok(KernelCheck {
            lhs: [lhs.re, lhs.im],
            rhs: [rhs.re, rhs.im],
            residual: (lhs - rhs).norm(),
            arc_nodes,
            sphere_nodes,
        })
    }
}

/// One-shot form of [`KernelIdentity::check`].
pub fn kernel_identity_check(
    form: DiagonalForm,
    a: i64,
    q: u64,
    lambda: u64,
    x: &[i64],
    cfg: &KernelConfig,
) -> Result<KernelCheck> {
    KernelIdentity::new(form, q, lambda, cfg.clone())?.check(a, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_arc_at_the_origin() {
        let form = DiagonalForm::sphere(4).unwrap();
        let c = kernel_identity_check(form, 0, 1, 4, &[0; 4], &KernelConfig::default()).unwrap();
        assert!(c.residual <= 1e-6, "{c:?}");
        assert!(c.lhs[0] > 0.0);
    }

    #[test]
    fn phase_follows_parity() {
        let form = DiagonalForm::sphere(4).unwrap();
        let mut k = KernelIdentity::new(form, 2, 16, KernelConfig::default()).unwrap();
        let even = k.check(1, &[1, 1, 0, 0]).unwrap();
        let odd = k.check(1, &[1, 0, 0, 0]).unwrap();
        assert!(even.residual <= 1e-6 && odd.residual <= 1e-6);
        assert!(even.rhs[0] * odd.rhs[0] <= 0.0 || odd.rhs[0].abs() < 1e-12);
        assert!(k.check(2, &[0; 4]).is_err());
    }
}
