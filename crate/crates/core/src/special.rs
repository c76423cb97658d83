//! Bessel functions of integer and half-integer order, and the Fourier
//! transform of the normalized surface measure on `S^{d-1}`.

use std::f64::consts::PI;

/// `Γ(n/2)` for a positive integer `n`.
pub fn gamma_half(n: u32) -> f64 {
    assert!(n >= 1, "Γ(0) is a pole");
    let (mut g, mut x) = if n.is_multiple_of(2) {
        (1.0, 1.0)
    } else {
        (PI.sqrt(), 0.5)
    };
    while 2.0 * x < n as f64 {
        g *= x;
        x += 1.0;
    }
    g
}

/// Surface area of `S^{d-1}` over two: `π^{d/2}/Γ(d/2)`.
pub fn half_sphere_area(d: usize) -> f64 {
    PI.powf(d as f64 / 2.0) / gamma_half(d as u32)
}

const SERIES_LIMIT: f64 = 12.0;

/// `Σ_k (-1)^k (z/2)^{2k} / (k! (ν+1)_k)`, i.e. `Γ(ν+1)(z/2)^{-ν} J_ν(z)`.
fn normalized_series(nu: f64, z: f64) -> f64 {
    let w = -0.25 * z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= w / (kf * (nu + kf));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) && kf > 0.5 * z {
            break;
        }
    }
    sum
}

/// Hankel's expansion, for `z` well beyond the order.
fn hankel(nu: f64, z: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 0.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..60 {
        let t = a / z.powi(k);
        if t.abs() > last {
            break;
        }
        last = t.abs();
        match k % 4 {
            0 => p += t,
            1 => q += t,
            2 => p -= t,
            _ => q -= t,
        }
        if t.abs() < 1e-18 {
            break;
        }
        let j = (2 * k + 1) as f64;
        a *= (mu - j * j) / ((k + 1) as f64 * 8.0);
    }
    let chi = z - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * z)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// `J_ν(z)` for `ν ≥ 0`, `z ≥ 0`.
pub fn bessel_j(nu: f64, z: f64) -> f64 {
    assert!(nu >= 0.0 && z >= 0.0);
    if z < SERIES_LIMIT.max(2.0 * nu) {
        let scale = (0.5 * z).powf(nu) / gamma_half((2.0 * nu + 2.0) as u32);
        scale * normalized_series(nu, z)
    } else {
        hankel(nu, z)
    }
}

/// `∫_{S^{d-1}} e(r⟨ω, y⟩) dσ(y)` for the probability measure `σ`, as a
/// function of `r = |ω|`: `Γ(d/2) (πr)^{1-d/2} J_{d/2-1}(2πr)`.
pub fn sphere_ft(d: usize, r: f64) -> f64 {
    assert!(d >= 2, "the sphere needs d >= 2");
    let r = r.abs();
    let nu = d as f64 / 2.0 - 1.0;
    let z = 2.0 * PI * r;
    if z < SERIES_LIMIT.max(2.0 * nu) {
        normalized_series(nu, z)
    } else {
        gamma_half(d as u32) * (PI * r).powf(-nu) * hankel(nu, z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussLegendre;

    /// `∫_0^π cos(2πr cos θ) sin^{d-2} θ dθ`, normalized by the same at `r = 0`.
    fn polar_oracle(d: usize, r: f64) -> f64 {
        let g = GaussLegendre::new(200);
        let panels = 8;
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..panels {
            let a = PI * i as f64 / panels as f64;
            let b = PI * (i + 1) as f64 / panels as f64;
            num += g.integrate(a, b, |t| {
                (2.0 * PI * r * t.cos()).cos() * t.sin().powi(d as i32 - 2)
            });
            den += g.integrate(a, b, |t| t.sin().powi(d as i32 - 2));
        }
        num / den
    }

    #[test]
    fn gamma_values() {
        assert!((gamma_half(1) - PI.sqrt()).abs() < 1e-15);
        assert_eq!(gamma_half(2), 1.0);
        assert_eq!(gamma_half(8), 6.0);
        assert!((gamma_half(5) - 0.75 * PI.sqrt()).abs() < 1e-15);
        assert!((half_sphere_area(4) - PI * PI).abs() < 1e-13);
    }

    #[test]
    fn closed_forms() {
        assert_eq!(sphere_ft(4, 0.0), 1.0);
        assert!(sphere_ft(3, 1.0).abs() < 1e-12);
        for r in [0.1, 0.7, 1.3, 2.2, 3.9, 7.5, 20.0, 55.5] {
            let z = 2.0 * PI * r;
            assert!((sphere_ft(3, r) - z.sin() / z).abs() < 1e-10, "r={r}");
            let j12 = (2.0 / (PI * z)).sqrt() * z.sin();
            assert!((bessel_j(0.5, z) - j12).abs() < 1e-10);
        }
    }

    #[test]
    fn matches_polar_quadrature() {
        for d in [2usize, 3, 4, 5, 6] {
            for r in [0.05, 0.5, 1.0, 1.9, 1.95, 2.0, 2.5, 4.0, 10.0, 17.3] {
                let want = polar_oracle(d, r);
                let got = sphere_ft(d, r);
                assert!((got - want).abs() < 1e-9, "d={d} r={r}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn decay_envelope() {
        // leading coefficient of Γ(2) (πr)^{-1} sqrt(2/(π·2πr)) is 1/π^2 for d=4
        let c = 1.0 / (PI * PI) * 1.05;
        for i in 0..400 {
            let r = 10.0 + i as f64 * 0.037;
            assert!(sphere_ft(4, r).abs() <= c * r.powf(-1.5));
        }
    }
}
