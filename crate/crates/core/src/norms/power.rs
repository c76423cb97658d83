//! Nonlinear power iteration for `ℓ^p → ℓ^q` norms of positive operators.
//!
//! For `f ≥ 0` with `‖f‖_p = 1` the update is
//! `f ← (A*((Af)^{q-1}))^{1/(p-1)}`, renormalized, which is the fixed-point
//! form of the Euler–Lagrange equation for `‖Af‖_q / ‖f‖_p`. Convergence to
//! the norm is not guaranteed, so the reported estimate is the largest ratio
//! actually achieved by some iterate.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Strategy;
use crate::fft::{fft_nd, Direction};
use crate::grid::{weighted_lp_norm, BoxSpec, GridFunction};
use crate::norms::probe::ball_radius;
use crate::norms::symmetric::SymmetricOperator;
use crate::operators::{average_on, ArithmeticMeasure, Budget};

/// A linear map with nonnegative matrix, on weighted `ℓ^p` spaces.
pub trait PositiveOperator: Sync {
    fn input_len(&self) -> usize;
    fn output_len(&self) -> usize;
    /// Point masses of the input space; `None` means counting measure.
    fn input_weights(&self) -> Option<&[f64]> {
        None
    }
    fn output_weights(&self) -> Option<&[f64]> {
        None
    }
    fn apply(&self, f: &[f64]) -> Result<Vec<f64>>;
    /// Adjoint with respect to the weighted pairings.
    fn adjoint(&self, g: &[f64]) -> Result<Vec<f64>>;
}

fn norm(v: &[f64], w: Option<&[f64]>, p: f64) -> Result<f64> {
    match w {
        Some(w) => weighted_lp_norm(v, w, p),
        None => crate::grid::lp_norm_slice(v, p),
    }
}

impl PositiveOperator for SymmetricOperator {
    fn input_len(&self) -> usize {
        self.input().len()
    }

    fn output_len(&self) -> usize {
        self.output().len()
    }

    fn input_weights(&self) -> Option<&[f64]> {
        Some(self.input().weights())
    }

    fn output_weights(&self) -> Option<&[f64]> {
        Some(self.output().weights())
    }

    fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        Ok(SymmetricOperator::apply(self, f))
    }

    fn adjoint(&self, g: &[f64]) -> Result<Vec<f64>> {
        Ok(SymmetricOperator::adjoint(self, g))
    }
}

fn require_symmetric(mu: &ArithmeticMeasure) -> Result<()> {
    let form = mu.shell().form();
    if !form.degree().is_multiple_of(2) {
        return Err(Error::Precondition(format!(
            "{form} has odd degree; its shell is not symmetric"
        )));
    }
    Ok(())
}

/// `A_λ` on the periodic box `Z_M^d`, by FFT.
pub struct TorusOperator {
    d: usize,
    m: usize,
    kernel: Vec<Complex64>,
    strategy: Strategy,
}

impl TorusOperator {
    pub fn new(
        mu: &ArithmeticMeasure,
        m: usize,
        strategy: Strategy,
        budget: Budget,
    ) -> Result<Self> {
        require_symmetric(mu)?;
        let d = mu.dim();
        budget.check(&BoxSpec::new(m, vec![0; d]))?;
        let mut kernel: Vec<Complex64> = mu
            .rasterize(m)
            .into_iter()
            .map(|v| Complex64::new(v, 0.0))
            .collect();
        fft_nd(&mut kernel, d, m, Direction::Forward, strategy);
        Ok(TorusOperator {
            d,
            m,
            kernel,
            strategy,
        })
    }

    pub fn side(&self) -> usize {
        self.m
    }
}

impl PositiveOperator for TorusOperator {
    fn input_len(&self) -> usize {
        self.kernel.len()
    }

    fn output_len(&self) -> usize {
        self.kernel.len()
    }

    fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.kernel.len() {
            return Err(Error::Precondition("input has the wrong length".into()));
        }
        let mut buf: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_nd(&mut buf, self.d, self.m, Direction::Forward, self.strategy);
        for (a, k) in buf.iter_mut().zip(&self.kernel) {
            *a *= k;
        }
        fft_nd(&mut buf, self.d, self.m, Direction::Inverse, self.strategy);
        Ok(buf.into_iter().map(|v| v.re.max(0.0)).collect())
    }

    fn adjoint(&self, g: &[f64]) -> Result<Vec<f64>> {
        self.apply(g)
    }
}

/// `A_λ` from functions on a box to the box enlarged by the shell radius.
pub struct WindowOperator {
    mu: ArithmeticMeasure,
    input: BoxSpec,
    output: BoxSpec,
    strategy: Strategy,
}

impl WindowOperator {
    pub fn new(
        mu: &ArithmeticMeasure,
        input: BoxSpec,
        strategy: Strategy,
        budget: Budget,
    ) -> Result<Self> {
        require_symmetric(mu)?;
        let output = input.enlarged(mu.radius());
        budget.check(&output)?;
        Ok(WindowOperator {
            mu: mu.clone(),
            input,
            output,
            strategy,
        })
    }

    pub fn input_box(&self) -> &BoxSpec {
        &self.input
    }
}

impl PositiveOperator for WindowOperator {
    fn input_len(&self) -> usize {
        self.input.cells()
    }

    fn output_len(&self) -> usize {
        self.output.cells()
    }

    fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        let f = GridFunction::from_values(self.input.clone(), f.to_vec())?;
        Ok(average_on(&f, &self.mu, &self.output, self.strategy)?.into_values())
    }

    fn adjoint(&self, g: &[f64]) -> Result<Vec<f64>> {
        let g = GridFunction::from_values(self.output.clone(), g.to_vec())?;
        Ok(average_on(&g, &self.mu, &self.input, self.strategy)?.into_values())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerConfig {
    pub max_iters: usize,
    pub rel_tol: f64,
}

impl Default for PowerConfig {
    fn default() -> Self {
        PowerConfig {
            max_iters: 200,
            rel_tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PowerRun {
    /// Largest achieved ratio over the seeds and all iterates.
    pub estimate: f64,
    /// The seed the iteration started from.
    pub seed: String,
    /// Ratio of every seed, in the order given.
    pub seed_ratios: Vec<f64>,
    /// Ratio of each iterate.
    pub ratios: Vec<f64>,
    /// Running maximum after each iterate.
    pub history: Vec<f64>,
    pub iters: usize,
    pub converged: bool,
    /// The input achieving the estimate.
    pub argmax: Vec<f64>,
}

fn check_pq(p: f64, q: f64) -> Result<()> {
    if !(1.0..=2.0).contains(&p) || q.is_nan() || q < 2.0 {
        return Err(Error::InvalidExponent(format!(
            "need 1 <= p <= 2 <= q <= infinity, got p={p}, q={q}"
        )));
    }
    Ok(())
}

fn ratio<O: PositiveOperator + ?Sized>(op: &O, f: &[f64], p: f64, q: f64) -> Result<f64> {
    let den = norm(f, op.input_weights(), p)?;
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(norm(&op.apply(f)?, op.output_weights(), q)? / den)
}

/// Runs the iteration from the best of `seeds`.
///
/// With `p = 1` or `q = ∞` the functional is maximized by the seeds
/// themselves (point masses, reflected shells), so no iteration is done.
pub fn run_power<O: PositiveOperator + ?Sized>(
    op: &O,
    seeds: Vec<(String, Vec<f64>)>,
    p: f64,
    q: f64,
    cfg: &PowerConfig,
) -> Result<PowerRun> {
    check_pq(p, q)?;
    if seeds.is_empty() {
        return Err(Error::Precondition("no seeds".into()));
    }
    let mut seed_ratios = Vec::with_capacity(seeds.len());
    for (name, f) in &seeds {
        if f.len() != op.input_len() || f.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::Precondition(format!(
                "seed {name} must be nonnegative with {} entries",
                op.input_len()
            )));
        }
        seed_ratios.push(ratio(op, f, p, q)?);
    }
    let best = (0..seeds.len())
        .max_by(|&a, &b| seed_ratios[a].total_cmp(&seed_ratios[b]).then(b.cmp(&a)))
        .expect("nonempty");
    let (name, start) = seeds.into_iter().nth(best).expect("in range");
    let mut estimate = seed_ratios[best];
    let mut argmax = start.clone();
    let mut run = PowerRun {
        estimate,
        seed: name,
        seed_ratios,
        ratios: Vec::new(),
        history: Vec::new(),
        iters: 0,
        converged: true,
        argmax: Vec::new(),
    };
    if p == 1.0 || q.is_infinite() {
        run.argmax = argmax;
        return Ok(run);
    }
    run.converged = false;
    let mut f = start;
    let mut prev = estimate;
    for _ in 0..cfg.max_iters {
        let af = op.apply(&f)?;
        let top = af.iter().fold(0.0f64, |m, v| m.max(*v));
        if top == 0.0 {
            break;
        }
        let g: Vec<f64> = af
            .iter()
            .map(|v| (v.max(0.0) / top).powf(q - 1.0))
            .collect();
        let h = op.adjoint(&g)?;
        let next: Vec<f64> = h.iter().map(|v| v.max(0.0).powf(1.0 / (p - 1.0))).collect();
        let scale = norm(&next, op.input_weights(), p)?;
        if scale == 0.0 || !scale.is_finite() {
            break;
        }
        f = next.into_iter().map(|v| v / scale).collect();
        let r = ratio(op, &f, p, q)?;
        run.iters += 1;
        run.ratios.push(r);
        if r > estimate {
            estimate = r;
            argmax.clone_from(&f);
        }
        run.history.push(estimate);
        if (r - prev).abs() <= cfg.rel_tol * r {
            run.converged = true;
            break;
        }
        prev = r;
    }
    run.estimate = estimate;
    run.argmax = argmax;
    Ok(run)
}

/// Where the iteration runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Domain {
    /// Symmetric functions on the ball `|x| ≤ radius` of `Z^d`.
    Symmetric { radius: u64 },
    /// The periodic box `Z_side^d`.
    Torus { side: usize },
    /// Functions on the centered box of the given side, in `Z^d`.
    Window { side: usize },
}

impl Domain {
    /// Symmetric functions on the ball of radius `⌈√λ⌉`.
    pub fn symmetric_for(lambda: u64) -> Self {
        Domain::Symmetric {
            radius: ball_radius(lambda),
        }
    }
}

fn noise(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let v: f64 = StandardNormal.sample(&mut rng);
            v.abs()
        })
        .collect()
}

fn grid_seeds(
    bx: &BoxSpec,
    centre: &[i64],
    wrap: Option<usize>,
    r: u64,
    mu: &ArithmeticMeasure,
) -> Vec<(String, Vec<f64>)> {
    let n = bx.cells();
    let r2 = (r * r) as i64;
    let rel = |x: &[i64]| -> Vec<i64> {
        x.iter()
            .zip(centre)
            .map(|(&a, &c)| match wrap {
                Some(m) => {
                    let m = m as i64;
                    let v = (a - c).rem_euclid(m);
                    if v > m / 2 {
                        v - m
                    } else {
                        v
                    }
                }
                None => a - c,
            })
            .collect()
    };
    let mut delta = vec![0.0; n];
    let mut ball = vec![0.0; n];
    let mut shell = vec![0.0; n];
    let lambda = mu.lambda() as u128;
    let form = mu.shell().form();
    for (i, (b, s)) in ball.iter_mut().zip(shell.iter_mut()).enumerate() {
        let y = rel(&bx.point_of(i));
        let sq: i64 = y.iter().map(|c| c * c).sum();
        if sq == 0 {
            delta[i] = 1.0;
        }
        if sq <= r2 {
            *b = 1.0;
        }
        if form.eval(&y) == lambda {
            *s = 1.0;
        }
    }
    vec![
        ("delta".into(), delta),
        (format!("ball({r})"), ball),
        ("shell".into(), shell),
    ]
}

/// Result of [`power_iteration_lower_bound`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerEstimate {
    pub lambda: u64,
    pub p: f64,
    pub q: f64,
    pub estimate: f64,
    pub seed: String,
    pub iters: usize,
    pub converged: bool,
    pub history: Vec<f64>,
}

/// Lower bound for `‖A_λ‖_{ℓ^p → ℓ^q}` from the best of the delta, ball
/// `⌈√λ⌉`, reflected shell and `|gaussian|` seeds.
#[allow(clippy::too_many_arguments)]
pub fn power_iteration_lower_bound(
    mu: &ArithmeticMeasure,
    p: f64,
    q: f64,
    domain: Domain,
    cfg: &PowerConfig,
    seed: u64,
    strategy: Strategy,
    budget: Budget,
) -> Result<PowerEstimate> {
    check_pq(p, q)?;
    let r = ball_radius(mu.lambda());
    let d = mu.dim();
    let run = match domain {
        Domain::Symmetric { radius } => {
            let op = SymmetricOperator::new(mu, radius, strategy, budget)?;
            let s = op.input();
            let rb = r.min(radius);
            let mut shell = vec![0.0; s.len()];
            for y in mu.points() {
                if let Some(i) = s.index_of(y) {
                    shell[i] = 1.0;
                }
            }
            let mut seeds = vec![
                ("delta".to_string(), s.delta()),
                (format!("ball({rb})"), s.ball(rb)),
            ];
            if shell.iter().any(|&v| v > 0.0) {
                seeds.push(("shell".into(), shell));
            }
            seeds.push(("noise".into(), noise(s.len(), seed)));
            run_power(&op, seeds, p, q, cfg)?
        }
        Domain::Torus { side } => {
            let op = TorusOperator::new(mu, side, strategy, budget)?;
            let bx = BoxSpec::new(side, vec![0; d]);
            let mut seeds = grid_seeds(&bx, &vec![0; d], Some(side), r, mu);
            seeds.push(("noise".into(), noise(bx.cells(), seed)));
            run_power(&op, seeds, p, q, cfg)?
        }
        Domain::Window { side } => {
            let lo = -((side / 2) as i64);
            let bx = BoxSpec::new(side, vec![lo; d]);
            let op = WindowOperator::new(mu, bx.clone(), strategy, budget)?;
            let mut seeds = grid_seeds(&bx, &vec![0; d], None, r, mu);
            seeds.push(("noise".into(), noise(bx.cells(), seed)));
            run_power(&op, seeds, p, q, cfg)?
        }
    };
    Ok(PowerEstimate {
        lambda: mu.lambda(),
        p,
        q,
        estimate: run.estimate,
        seed: run.seed,
        iters: run.iters,
        converged: run.converged,
        history: run.history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{enumerate_shell, DiagonalForm};
    use crate::norms::probe::{delta_ratio, probe_ratio, Probe};

    fn measure(d: usize, lambda: u64) -> ArithmeticMeasure {
        let form = DiagonalForm::sphere(d).unwrap();
        ArithmeticMeasure::new(enumerate_shell(form, lambda, 1 << 20).unwrap()).unwrap()
    }

    fn run(mu: &ArithmeticMeasure, p: f64, q: f64, domain: Domain) -> PowerEstimate {
        power_iteration_lower_bound(
            mu,
            p,
            q,
            domain,
            &PowerConfig::default(),
            1,
            Strategy::Parallel,
            Budget::default(),
        )
        .unwrap()
    }

    #[test]
    fn l2_on_the_torus_is_one() {
        let mu = measure(3, 5);
        let est = run(&mu, 2.0, 2.0, Domain::Torus { side: 8 });
        assert!((est.estimate - 1.0).abs() < 1e-9, "{est:?}");
        assert!(est.estimate <= 1.0 + 1e-12);
    }

    #[test]
    fn l1_to_linf_is_one_over_n() {
        let mu = measure(4, 13);
        let n = mu.count() as f64;
        for domain in [
            Domain::symmetric_for(13),
            Domain::Window { side: 5 },
            Domain::Torus { side: 12 },
        ] {
            let est = run(&mu, 1.0, f64::INFINITY, domain);
            assert!(
                (est.estimate - 1.0 / n).abs() <= 1e-12,
                "{domain:?}: {est:?}"
            );
        }
    }

    #[test]
    fn dominates_the_probes() {
        let mu = measure(4, 25);
        let (p, q) = (5.0 / 3.0, 2.5);
        let est = run(&mu, p, q, Domain::symmetric_for(25));
        let b = Budget::default();
        let delta = probe_ratio(&Probe::Delta, &mu, p, q, Strategy::Parallel, b).unwrap();
        let ball = probe_ratio(&Probe::Ball(5), &mu, p, q, Strategy::Parallel, b).unwrap();
        assert!(est.estimate >= delta && est.estimate >= ball);
        assert!((delta - delta_ratio(mu.count() as u128, q)).abs() < 1e-12);
        assert!(est.history.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn shell_seed_is_extremal_for_sup_norm() {
        let mu = measure(4, 9);
        let p = 1.5;
        let est = run(&mu, p, f64::INFINITY, Domain::symmetric_for(9));
        let want = (mu.count() as f64).powf(-1.0 / p);
        assert!((est.estimate - want).abs() < 1e-12 * want);
    }

    #[test]
    fn window_and_symmetric_agree_on_symmetric_seeds() {
        let mu = measure(4, 5);
        let (p, q) = (1.5, 3.0);
        let w = run(&mu, p, q, Domain::Window { side: 7 });
        let s = run(&mu, p, q, Domain::Symmetric { radius: 3 });
        assert!(w.estimate > 0.0 && s.estimate > 0.0);
        let delta = delta_ratio(mu.count() as u128, q);
        assert!(w.estimate >= delta && s.estimate >= delta);
    }

    #[test]
    fn rejects_bad_exponents() {
        let mu = measure(4, 5);
        let cfg = PowerConfig::default();
        let b = Budget::default();
        let dom = Domain::symmetric_for(5);
        for (p, q) in [(0.5, 2.0), (2.5, 3.0), (1.5, 1.5)] {
            assert!(
                power_iteration_lower_bound(&mu, p, q, dom, &cfg, 0, Strategy::Sequential, b)
                    .is_err()
            );
        }
    }
}
