//! The averaging operator `A_λ f = σ_λ * f`, its maximal variants and `σ̂_λ`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Strategy;
use crate::fft::{fft_nd, Direction};
use crate::grid::{BoxSpec, GridFunction};
use crate::lattice::SphereShell;
use crate::sums::e;

/// Uniform probability measure on a full shell.
#[derive(Clone, Debug, PartialEq)]
pub struct ArithmeticMeasure {
    shell: SphereShell,
    weight: f64,
}

impl ArithmeticMeasure {
    pub fn new(shell: SphereShell) -> Result<Self> {
        if !shell.is_full() {
            return Err(Error::Precondition(
                "the arithmetic measure needs a full-mode shell".into(),
            ));
        }
        if shell.count() == 0 {
            return Err(Error::Precondition(format!(
                "lambda={} is not represented by {}",
                shell.lambda(),
                shell.form()
            )));
        }
        let weight = 1.0 / shell.count() as f64;
        Ok(ArithmeticMeasure { shell, weight })
    }

    pub fn shell(&self) -> &SphereShell {
        &self.shell
    }

    pub fn dim(&self) -> usize {
        self.shell.form().dimension()
    }

    pub fn lambda(&self) -> u64 {
        self.shell.lambda()
    }

    pub fn count(&self) -> usize {
        self.shell.count() as usize
    }

    /// The point mass `1/N`.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Largest coordinate modulus on the shell.
    pub fn radius(&self) -> u64 {
        self.shell.radius()
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[i64]> + '_ {
        self.shell.points()
    }

    fn flat(&self) -> &[i64] {
        self.shell.flat_points().expect("full shell")
    }

    /// The measure folded onto `Z_m^d`, row-major.
    pub fn rasterize(&self, m: usize) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; m.pow(d as u32)];
        for y in self.points() {
            let idx = y
                .iter()
                .fold(0usize, |acc, &c| acc * m + c.rem_euclid(m as i64) as usize);
            out[idx] += self.weight;
        }
        out
    }
}

/// Memory cap for dense work, in grid cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_cells: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_cells: 1 << 27 }
    }
}

impl Budget {
    pub fn check(&self, bx: &BoxSpec) -> Result<()> {
        match bx.checked_cells() {
            Some(n) if n <= self.max_cells => Ok(()),
            _ => Err(Error::Budget(format!(
                "box of side {} in d={} exceeds {} cells",
                bx.side,
                bx.dim(),
                self.max_cells
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// Enlarge the box so nothing wraps, emulating `Z^d`.
    Free,
    /// Periodic on the input box.
    Torus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Path {
    Sparse,
    Dense,
    Auto,
}

/// A contiguous run along one axis: target start, source start, length.
#[derive(Clone, Copy, Debug)]
struct Seg {
    t: usize,
    s: usize,
    len: usize,
}

/// Target indices `t` with `t + shift` in `[0, src_side)`.
fn free_segs(shift: i64, t_side: usize, src_side: usize) -> ([Seg; 2], usize) {
    let lo = (-shift).max(0);
    let hi = (src_side as i64 - shift).min(t_side as i64);
    let none = Seg { t: 0, s: 0, len: 0 };
    if hi <= lo {
        ([none, none], 0)
    } else {
        let seg = Seg {
            t: lo as usize,
            s: (lo + shift) as usize,
            len: (hi - lo) as usize,
        };
        ([seg, none], 1)
    }
}

/// Target indices on `Z_m` paired with `(t + shift) mod m`.
fn torus_segs(shift: i64, m: usize) -> ([Seg; 2], usize) {
    let s0 = shift.rem_euclid(m as i64) as usize;
    let first = Seg {
        t: 0,
        s: s0,
        len: m - s0,
    };
    if s0 == 0 {
        ([first, Seg { t: 0, s: 0, len: 0 }], 1)
    } else {
        (
            [
                first,
                Seg {
                    t: m - s0,
                    s: 0,
                    len: s0,
                },
            ],
            2,
        )
    }
}

#[allow(clippy::too_many_arguments)]
fn add_block(
    out: &mut [f64],
    src: &[f64],
    segs: &[([Seg; 2], usize)],
    axis: usize,
    t_side: usize,
    s_side: usize,
    t_base: usize,
    s_base: usize,
) {
    let (pair, n) = &segs[axis];
    let last = axis + 1 == segs.len();
    for seg in &pair[..*n] {
        if last {
            let o = &mut out[t_base * t_side + seg.t..t_base * t_side + seg.t + seg.len];
            let i = &src[s_base * s_side + seg.s..s_base * s_side + seg.s + seg.len];
            for (a, b) in o.iter_mut().zip(i) {
                *a += *b;
            }
        } else {
            for j in 0..seg.len {
                add_block(
                    out,
                    src,
                    segs,
                    axis + 1,
                    t_side,
                    s_side,
                    t_base * t_side + seg.t + j,
                    s_base * s_side + seg.s + j,
                );
            }
        }
    }
}

/// Sparse gather `out[x] = Σ_y f(x - y)` (times the point weight) on `target`.
///
/// Parallel over the first output coordinate; each cell sums shell points in
/// lexicographic order, so the result does not depend on the strategy.
fn gather(
    f: &GridFunction,
    mu: &ArithmeticMeasure,
    target: &BoxSpec,
    boundary: Boundary,
    strategy: Strategy,
) -> GridFunction {
    let d = f.dim();
    let fb = f.box_spec();
    let (ts, ss) = (target.side, fb.side);
    let slab = ts.pow(d as u32 - 1);
    let src_slab = ss.pow(d as u32 - 1);
    let pts = mu.flat();
    let src = f.values();
    let mut out = vec![0.0; target.cells()];
    // index shift per axis: source index = target index + (o_t - o_f) - y
    let delta: Vec<i64> = target
        .offset
        .iter()
        .zip(&fb.offset)
        .map(|(t, s)| t - s)
        .collect();
    strategy.for_each_chunk_mut(&mut out, slab, |t0, chunk| {
        let mut segs = Vec::with_capacity(d.saturating_sub(1));
        for y in pts.chunks_exact(d) {
            let s0 = t0 as i64 + delta[0] - y[0];
            let s0 = match boundary {
                Boundary::Free if s0 < 0 || s0 >= ss as i64 => continue,
                Boundary::Free => s0 as usize,
                Boundary::Torus => s0.rem_euclid(ss as i64) as usize,
            };
            let src_slice = &src[s0 * src_slab..(s0 + 1) * src_slab];
            if d == 1 {
                chunk[0] += src_slice[0];
                continue;
            }
            segs.clear();
            for a in 1..d {
                let shift = delta[a] - y[a];
                segs.push(match boundary {
                    Boundary::Free => free_segs(shift, ts, ss),
                    Boundary::Torus => torus_segs(shift, ss),
                });
            }
            if segs.iter().any(|s| s.1 == 0) {
                continue;
            }
            add_block(chunk, src_slice, &segs, 0, ts, ss, 0, 0);
        }
        let w = mu.weight();
        chunk.iter_mut().for_each(|v| *v *= w);
    });
    GridFunction::from_values(target.clone(), out).expect("finite output")
}

/// `A_λ f` on `Z^d`, on `f`'s box enlarged by the shell radius.
pub fn average(f: &GridFunction, mu: &ArithmeticMeasure) -> Result<GridFunction> {
    average_with(f, mu, Path::Auto, Strategy::default(), Budget::default())
}

pub fn average_with(
    f: &GridFunction,
    mu: &ArithmeticMeasure,
    path: Path,
    strategy: Strategy,
    budget: Budget,
) -> Result<GridFunction> {
    check_dims(f, mu)?;
    let r = mu.radius();
    let target = f.box_spec().enlarged(r);
    budget.check(&target)?;
    let dense = match path {
        Path::Sparse => false,
        Path::Dense => true,
        Path::Auto => prefer_dense(mu.count(), f.box_spec().cells(), target.cells()),
    };
    if dense {
        let m = crate::fft::smooth_size(target.side);
        let out = average_fft(f, mu, m, Boundary::Free, strategy, budget)?;
        Ok(out.restricted_to(target))
    } else {
        Ok(gather(f, mu, &target, Boundary::Free, strategy))
    }
}

/// Crossover rule: sparse when `N · |box(f)| < M^d log M^d`.
pub fn prefer_dense(count: usize, src_cells: usize, target_cells: usize) -> bool {
    let t = target_cells as f64;
    (count as f64) * (src_cells as f64) >= t * t.max(2.0).log2()
}

/// `A_λ f` restricted to an arbitrary box, with `Z^d` semantics.
pub fn average_on(
    f: &GridFunction,
    mu: &ArithmeticMeasure,
    target: &BoxSpec,
    strategy: Strategy,
) -> Result<GridFunction> {
    check_dims(f, mu)?;
    if target.dim() != f.dim() {
        return Err(Error::Precondition(
            "target box has the wrong dimension".into(),
        ));
    }
    Ok(gather(f, mu, target, Boundary::Free, strategy))
}

/// `A_λ f` on the periodic box `Z_M^d` carrying `f`.
pub fn average_torus(
    f: &GridFunction,
    mu: &ArithmeticMeasure,
    strategy: Strategy,
) -> Result<GridFunction> {
    check_dims(f, mu)?;
    Ok(gather(f, mu, f.box_spec(), Boundary::Torus, strategy))
}

fn check_dims(f: &GridFunction, mu: &ArithmeticMeasure) -> Result<()> {
    if f.dim() != mu.dim() {
        return Err(Error::Precondition(format!(
            "grid has d={} but the measure has d={}",
            f.dim(),
            mu.dim()
        )));
    }
    Ok(())
}

/// Circular convolution with the measure rasterized on `Z_m^d`, via FFT.
///
/// In `Free` mode `m` must be at least `side(f) + 2r` so nothing wraps; the
/// result lives on the box of side `m` starting at `offset(f) - r`. In `Torus`
/// mode `m` must equal `side(f)` and the result lives on `f`'s box.
pub fn average_fft(
    f: &GridFunction,
    mu: &ArithmeticMeasure,
    m: usize,
    boundary: Boundary,
    strategy: Strategy,
    budget: Budget,
) -> Result<GridFunction> {
    check_dims(f, mu)?;
    let d = f.dim();
    let r = mu.radius();
    let fb = f.box_spec();
    let (out_box, shift) = match boundary {
        Boundary::Free => {
            if m < fb.side + 2 * r as usize {
                return Err(Error::Precondition(format!(
                    "M={m} is below side(f) + 2r = {}; the convolution would wrap",
                    fb.side + 2 * r as usize
                )));
            }
            let off = fb.offset.iter().map(|o| o - r as i64).collect();
            (BoxSpec::new(m, off), r as usize)
        }
        Boundary::Torus => {
            if m != fb.side {
                return Err(Error::Precondition(format!(
                    "torus mode needs M = side(f) = {}, got {m}",
                    fb.side
                )));
            }
            (fb.clone(), 0)
        }
    };
    budget.check(&out_box)?;
    let n = out_box.cells();
    let mut fx = vec![Complex64::default(); n];
    let src_slab = fb.side;
    for (i, row) in f.values().chunks_exact(src_slab).enumerate() {
        // row i of f starts at multi-index (i's digits, 0); shift every axis
        let mut rest = i;
        let mut base = 0usize;
        let mut mult = m;
        for _ in 0..d - 1 {
            base += (rest % fb.side + shift) * mult;
            rest /= fb.side;
            mult *= m;
        }
        base += shift;
        for (j, v) in row.iter().enumerate() {
            fx[base + j] = Complex64::new(*v, 0.0);
        }
    }
    let mut kx: Vec<Complex64> = mu
        .rasterize(m)
        .into_iter()
        .map(|v| Complex64::new(v, 0.0))
        .collect();
    fft_nd(&mut fx, d, m, Direction::Forward, strategy);
    fft_nd(&mut kx, d, m, Direction::Forward, strategy);
    for (a, b) in fx.iter_mut().zip(&kx) {
        *a *= b;
    }
    fft_nd(&mut fx, d, m, Direction::Inverse, strategy);
    let scale = f.values().iter().fold(1.0f64, |s, v| s.max(v.abs()));
    let max_imag = fx.iter().fold(0.0f64, |s, v| s.max(v.im.abs()));
    debug_assert!(max_imag <= 1e-9 * scale, "imaginary residue {max_imag}");
    let values = fx.into_iter().map(|v| v.re).collect();
    GridFunction::from_values(out_box, values)
}

/// `sup_{μ} |A_μ f|` pointwise, on `f`'s box enlarged by the largest radius.
pub fn maximal(
    f: &GridFunction,
    measures: &[ArithmeticMeasure],
    strategy: Strategy,
    budget: Budget,
) -> Result<GridFunction> {
    let r = measures
        .iter()
        .map(ArithmeticMeasure::radius)
        .max()
        .ok_or_else(|| Error::Precondition("the level set is empty".into()))?;
    let target = f.box_spec().enlarged(r);
    budget.check(&target)?;
    let mut out = GridFunction::zeros(target.clone());
    for mu in measures {
        let a = average_on(f, mu, &target, strategy)?;
        for (o, v) in out.values_mut().iter_mut().zip(a.values()) {
            *o = o.max(v.abs());
        }
    }
    Ok(out)
}

/// `σ̂_λ(ξ) = N^{-1} Σ_y e(-y·ξ)` by direct summation.
pub fn sigma_hat(mu: &ArithmeticMeasure, xi: &[f64]) -> Complex64 {
    let s: Complex64 = mu
        .points()
        .map(|y| e(y.iter().zip(xi).map(|(&a, b)| a as f64 * b).sum()))
        .sum();
    s * mu.weight()
}

/// Fast real evaluation of `σ̂_λ` from the nonnegative-orthant points.
///
/// Summing `e(-y·ξ)` over the sign flips of `y` gives `Π_i 2cos(2π y_i ξ_i)`,
/// with factor 1 on zero coordinates.
#[derive(Clone, Debug)]
pub struct SigmaHat {
    d: usize,
    radius: usize,
    reps: Vec<u16>,
    weight: f64,
}

impl SigmaHat {
    pub fn new(mu: &ArithmeticMeasure) -> Self {
        let d = mu.dim();
        let reps = mu
            .points()
            .filter(|y| y.iter().all(|&c| c >= 0))
            .flat_map(|y| y.iter().map(|&c| c as u16).collect::<Vec<_>>())
            .collect();
        SigmaHat {
            d,
            radius: mu.radius() as usize,
            reps,
            weight: mu.weight(),
        }
    }

    pub fn eval(&self, xi: &[f64]) -> f64 {
        let r = self.radius;
        let mut table = vec![1.0f64; self.d * (r + 1)];
        for (i, &x) in xi.iter().enumerate() {
            let row = &mut table[i * (r + 1)..(i + 1) * (r + 1)];
            for (j, v) in row.iter_mut().enumerate().skip(1) {
                *v = 2.0 * (std::f64::consts::TAU * j as f64 * x).cos();
            }
        }
        let mut s = 0.0;
        for y in self.reps.chunks_exact(self.d) {
            let mut t = 1.0;
            for (i, &c) in y.iter().enumerate() {
                t *= table[i * (r + 1) + c as usize];
            }
            s += t;
        }
        s * self.weight
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{enumerate_shell, DiagonalForm};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn measure(d: usize, lambda: u64) -> ArithmeticMeasure {
        let form = DiagonalForm::sphere(d).unwrap();
        ArithmeticMeasure::new(enumerate_shell(form, lambda, 1 << 20).unwrap()).unwrap()
    }

    fn random_grid(rng: &mut ChaCha8Rng, d: usize, side: usize, lo: i64) -> GridFunction {
        let bx = BoxSpec::new(side, vec![lo; d]);
        let vals = (0..bx.cells()).map(|_| rng.random::<f64>()).collect();
        GridFunction::from_values(bx, vals).unwrap()
    }

    #[test]
    fn delta_spreads_over_unit_vectors() {
        let mu = measure(4, 1);
        let out = average(&GridFunction::delta(4), &mu).unwrap();
        assert_eq!(out.support_size(), 8);
        for y in mu.points() {
            assert_eq!(out.get(y), 0.125);
        }
    }

    #[test]
    fn constants_are_fixed_on_the_torus() {
        let mu = measure(3, 6);
        let f = GridFunction::from_values(BoxSpec::new(5, vec![-2; 3]), vec![2.5; 125]).unwrap();
        let out = average_torus(&f, &mu, Strategy::Parallel).unwrap();
        assert!(out.values().iter().all(|v| (v - 2.5).abs() < 1e-14));
        let dense = average_fft(
            &f,
            &mu,
            5,
            Boundary::Torus,
            Strategy::Sequential,
            Budget::default(),
        )
        .unwrap();
        assert!(dense.max_abs_diff(&out) < 1e-12);
    }

    #[test]
    fn sparse_matches_fft() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mu = measure(4, 5);
        let f = random_grid(&mut rng, 4, 9, -4);
        let sparse = average_with(
            &f,
            &mu,
            Path::Sparse,
            Strategy::Sequential,
            Budget::default(),
        )
        .unwrap();
        let par =
            average_with(&f, &mu, Path::Sparse, Strategy::Parallel, Budget::default()).unwrap();
        assert_eq!(sparse, par);
        let dense = average_fft(
            &f,
            &mu,
            16,
            Boundary::Free,
            Strategy::Parallel,
            Budget::default(),
        )
        .unwrap();
        assert!(sparse.max_abs_diff(&dense) < 1e-12);
        assert!((sparse.sum() - f.sum()).abs() < 1e-9);
    }

    #[test]
    fn torus_gather_matches_fft() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mu = measure(3, 11);
        let f = random_grid(&mut rng, 3, 7, 2);
        let a = average_torus(&f, &mu, Strategy::Parallel).unwrap();
        let b = average_fft(
            &f,
            &mu,
            7,
            Boundary::Torus,
            Strategy::Parallel,
            Budget::default(),
        )
        .unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn fft_delta_reproduces_the_measure() {
        let mu = measure(4, 3);
        let out = average_fft(
            &GridFunction::delta(4),
            &mu,
            5,
            Boundary::Free,
            Strategy::Parallel,
            Budget::default(),
        )
        .unwrap();
        for (i, v) in out.values().iter().enumerate() {
            let x = out.box_spec().point_of(i);
            let on = x.iter().map(|c| c * c).sum::<i64>() == 3;
            let want = if on { mu.weight() } else { 0.0 };
            assert!((v - want).abs() < 1e-12);
        }
        assert!(average_fft(
            &GridFunction::delta(4),
            &mu,
            2,
            Boundary::Free,
            Strategy::Parallel,
            Budget::default()
        )
        .is_err());
    }

    #[test]
    fn maximal_of_delta_is_reciprocal_count() {
        let form = DiagonalForm::sphere(4).unwrap();
        let ms: Vec<_> = [9u64, 11, 13, 15]
            .iter()
            .map(|&l| ArithmeticMeasure::new(enumerate_shell(form, l, 1 << 20).unwrap()).unwrap())
            .collect();
        let out = maximal(
            &GridFunction::delta(4),
            &ms,
            Strategy::Parallel,
            Budget::default(),
        )
        .unwrap();
        for (i, v) in out.values().iter().enumerate() {
            let x = out.box_spec().point_of(i);
            let n2 = x.iter().map(|c| c * c).sum::<i64>() as u64;
            let want = match ms.iter().find(|m| m.lambda() == n2) {
                Some(m) => m.weight(),
                None => 0.0,
            };
            assert_eq!(*v, want);
        }
    }

    #[test]
    fn sigma_hat_examples() {
        let mu = measure(4, 1);
        assert!((sigma_hat(&mu, &[0.5, 0.0, 0.0, 0.0]).re - 0.5).abs() < 1e-14);
        let mu = measure(4, 30);
        let fast = SigmaHat::new(&mu);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let xi: Vec<f64> = (0..4).map(|_| rng.random::<f64>() - 0.5).collect();
            let z = sigma_hat(&mu, &xi);
            assert!(z.im.abs() < 1e-10);
            assert!((z.re - fast.eval(&xi)).abs() < 1e-12);
        }
        assert!((fast.eval(&[0.0; 4]) - 1.0).abs() < 1e-14);
    }
}
