//! The cutoff `Ψ(ξ) = Π ψ(ξ_i)` and its inverse Fourier transform.
//!
//! `ψ = 1` on `[-1/8, 1/8]`, `ψ = 0` off `(-1/4, 1/4)`, and on the transition
//! band `ψ(t) = h((1/4 - |t|)·8)` with the smooth step
//! `h(s) = φ(s) / (φ(s) + φ(1 - s))`, `φ(s) = exp(-1/s)`.

use std::f64::consts::TAU;

use crate::quadrature::GaussLegendre;

pub const INNER: f64 = 0.125;
pub const OUTER: f64 = 0.25;

fn phi(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        let a = phi(s);
        a / (a + phi(1.0 - s))
    }
}

/// The one-dimensional profile `ψ`.
pub fn psi(t: f64) -> f64 {
    let t = t.abs();
    if t <= INNER {
        1.0
    } else if t >= OUTER {
        0.0
    } else {
        smooth_step((OUTER - t) / (OUTER - INNER))
    }
}

/// `Ψ(ξ) = Π_i ψ(ξ_i)`.
pub fn psi_d(xi: &[f64]) -> f64 {
    xi.iter().map(|&t| psi(t)).product()
}

/// Direct quadrature for `ψ̌(t) = ∫ ψ(s) e(ts) ds` and its derivative.
fn psi_check_direct(g: &GaussLegendre, t: f64) -> (f64, f64) {
    let mut v = 0.0;
    let mut dv = 0.0;
    for (a, b, flat) in [(0.0, INNER, true), (INNER, OUTER, false)] {
        let (xs, ws) = g.on(a, b);
        for (s, w) in xs.iter().zip(&ws) {
            let p = if flat { 1.0 } else { psi(*s) };
            let arg = TAU * t * s;
            v += w * p * arg.cos();
            dv -= w * p * TAU * s * arg.sin();
        }
    }
    (2.0 * v, 2.0 * dv)
}

/// Tabulated `ψ̌` with cubic Hermite interpolation on `[0, T_MAX]`, direct
/// quadrature beyond.
#[derive(Clone, Debug)]
pub struct PsiCheck {
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
    rule: GaussLegendre,
}

const T_MAX: f64 = 256.0;
const STEPS_PER_UNIT: usize = 128;

impl Default for PsiCheck {
    fn default() -> Self {
        Self::new()
    }
}

impl PsiCheck {
    pub fn new() -> Self {
        let rule = GaussLegendre::new(240);
        let n = (T_MAX as usize) * STEPS_PER_UNIT + 1;
        let step = 1.0 / STEPS_PER_UNIT as f64;
        let (values, slopes) = (0..n)
            .map(|i| psi_check_direct(&rule, i as f64 * step))
            .unzip();
        PsiCheck {
            step,
            values,
            slopes,
            rule,
        }
    }

    /// `∫ψ = ψ̌(0)`.
    pub fn mass(&self) -> f64 {
        self.values[0]
    }

    pub fn eval(&self, t: f64) -> f64 {
        let t = t.abs();
        let x = t / self.step;
        let i = x as usize;
        if i + 1 >= self.values.len() {
            return psi_check_direct(&self.rule, t).0;
        }
        let u = x - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * self.step, self.slopes[i + 1] * self.step);
        let u2 = u * u;
        let u3 = u2 * u;
        (2.0 * u3 - 3.0 * u2 + 1.0) * y0
            + (u3 - 2.0 * u2 + u) * m0
            + (-2.0 * u3 + 3.0 * u2) * y1
            + (u3 - u2) * m1
    }

    /// `Ψ̌(v) = Π_i ψ̌(v_i)`.
    pub fn eval_d(&self, v: &[f64]) -> f64 {
        v.iter().map(|&t| self.eval(t)).product()
    }
}
