//! `A_λ` restricted to functions invariant under signed coordinate permutations.
//!
//! A symmetric function on the ball `|x| ≤ R` is stored by its values on the
//! sorted representatives `0 ≤ x_1 ≤ ... ≤ x_d`, each carrying its orbit size
//! as a weight, so `‖f‖_p^p = Σ w_i |f_i|^p`. The shell of an even-degree
//! diagonal form is itself symmetric, hence so is `A_λ f`.

use crate::error::{Error, Result};
use crate::exec::Strategy;
use crate::grid::{BoxSpec, GridFunction};
use crate::operators::{ArithmeticMeasure, Budget};

const ABSENT: u32 = u32::MAX;

/// Sorted nonnegative representatives of the symmetric orbits in a ball.
#[derive(Clone, Debug)]
pub struct OrbitSpace {
    d: usize,
    radius: u64,
    reps: Vec<i64>,
    weights: Vec<f64>,
    lookup: Vec<u32>,
}

fn orbit_size(x: &[i64]) -> f64 {
    let nonzero = x.iter().filter(|&&c| c != 0).count() as i32;
    let mut size = 2f64.powi(nonzero) * (1..=x.len()).product::<usize>() as f64;
    let mut run = 1usize;
    for w in x.windows(2) {
        if w[0] == w[1] {
            run += 1;
            size /= run as f64;
        } else {
            run = 1;
        }
    }
    size
}

impl OrbitSpace {
    pub fn new(d: usize, radius: u64, budget: Budget) -> Result<Self> {
        if d == 0 {
            return Err(Error::Precondition("d must be positive".into()));
        }
        let side = radius as usize + 1;
        let cells = side
            .checked_pow(d as u32)
            .filter(|&c| c <= budget.max_cells)
            .ok_or_else(|| {
                Error::Budget(format!(
                    "orbit lookup for radius {radius} in d={d} exceeds {} cells",
                    budget.max_cells
                ))
            })?;
        let r2 = (radius as i64) * (radius as i64);
        let mut reps = Vec::new();
        let mut cur = vec![0i64; d];
        fn walk(pos: usize, lo: i64, used: i64, r2: i64, cur: &mut [i64], out: &mut Vec<i64>) {
            if pos == cur.len() {
                out.extend_from_slice(cur);
                return;
            }
            let left = (cur.len() - pos) as i64;
            let mut c = lo;
            // later coordinates are at least c, so all of them cost c^2
            while used + left * c * c <= r2 {
                cur[pos] = c;
                walk(pos + 1, c, used + c * c, r2, cur, out);
                c += 1;
            }
        }
        walk(0, 0, 0, r2, &mut cur, &mut reps);
        let n = reps.len() / d;
        if n >= ABSENT as usize {
            return Err(Error::Budget(format!("{n} orbits overflow the index type")));
        }
        let mut lookup = vec![ABSENT; cells];
        let weights = reps
            .chunks_exact(d)
            .enumerate()
            .map(|(i, x)| {
                let key = x.iter().fold(0usize, |acc, &c| acc * side + c as usize);
                lookup[key] = i as u32;
                orbit_size(x)
            })
            .collect();
        Ok(OrbitSpace {
            d,
            radius,
            reps,
            weights,
            lookup,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn radius(&self) -> u64 {
        self.radius
    }

    /// Number of orbits.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn rep(&self, i: usize) -> &[i64] {
        &self.reps[i * self.d..(i + 1) * self.d]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of lattice points in the ball.
    pub fn points(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Orbit index of an arbitrary point, `None` outside the ball.
    pub fn index_of(&self, x: &[i64]) -> Option<usize> {
        let mut buf = [0i64; 16];
        let mut heap;
        let key: &mut [i64] = if x.len() <= buf.len() {
            &mut buf[..x.len()]
        } else {
            heap = vec![0i64; x.len()];
            &mut heap
        };
        let side = self.radius as i64 + 1;
        for (k, &c) in key.iter_mut().zip(x) {
            *k = c.abs();
            if *k >= side {
                return None;
            }
        }
        key.sort_unstable();
        let idx = key
            .iter()
            .fold(0usize, |acc, &c| acc * side as usize + c as usize);
        match self.lookup[idx] {
            ABSENT => None,
            i => Some(i as usize),
        }
    }

    /// The function on `Z^d` (on the box `[-R, R]^d`) with these orbit values.
    pub fn expand(&self, values: &[f64]) -> Result<GridFunction> {
        if values.len() != self.len() {
            return Err(Error::Precondition(format!(
                "expected {} orbit values, got {}",
                self.len(),
                values.len()
            )));
        }
        let bx = BoxSpec::centered(self.d, self.radius);
        let out = (0..bx.cells())
            .map(|i| self.index_of(&bx.point_of(i)).map_or(0.0, |j| values[j]))
            .collect();
        GridFunction::from_values(bx, out)
    }

    /// Values of `g` at the representatives.
    pub fn sample(&self, g: &GridFunction) -> Vec<f64> {
        self.reps.chunks_exact(self.d).map(|x| g.get(x)).collect()
    }

    /// The indicator of the ball of radius `r ≤ R`.
    pub fn ball(&self, r: u64) -> Vec<f64> {
        let r2 = (r as i64) * (r as i64);
        self.reps
            .chunks_exact(self.d)
            .map(|x| {
                if x.iter().map(|c| c * c).sum::<i64>() <= r2 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// The point mass at the origin.
    pub fn delta(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.len()];
        v[0] = 1.0;
        v
    }
}

/// Row-compressed integer matrix.
#[derive(Clone, Debug, Default)]
struct Csr {
    ptr: Vec<usize>,
    cols: Vec<u32>,
    counts: Vec<u32>,
}

impl Csr {
    fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.ptr[i]..self.ptr[i + 1];
        self.cols[r.clone()]
            .iter()
            .zip(&self.counts[r])
            .map(|(&c, &n)| (c as usize, n as f64))
    }

    fn nnz(&self) -> usize {
        self.cols.len()
    }

    fn transpose(&self, n_cols: usize) -> Csr {
        let mut ptr = vec![0usize; n_cols + 1];
        for &c in &self.cols {
            ptr[c as usize + 1] += 1;
        }
        for i in 0..n_cols {
            ptr[i + 1] += ptr[i];
        }
        let mut fill = ptr.clone();
        let mut cols = vec![0u32; self.nnz()];
        let mut counts = vec![0u32; self.nnz()];
        for i in 0..self.ptr.len() - 1 {
            for k in self.ptr[i]..self.ptr[i + 1] {
                let c = self.cols[k] as usize;
                cols[fill[c]] = i as u32;
                counts[fill[c]] = self.counts[k];
                fill[c] += 1;
            }
        }
        Csr { ptr, cols, counts }
    }
}

/// `A_λ` from symmetric functions on the ball of radius `R` to symmetric
/// functions on the ball of radius `R + r`, `r` the shell's Euclidean radius.
#[derive(Clone, Debug)]
pub struct SymmetricOperator {
    input: OrbitSpace,
    output: OrbitSpace,
    weight: f64,
    forward: Csr,
    backward: Csr,
    strategy: Strategy,
}

const ROW_CHUNK: usize = 256;

impl SymmetricOperator {
    pub fn new(
        mu: &ArithmeticMeasure,
        radius: u64,
        strategy: Strategy,
        budget: Budget,
    ) -> Result<Self> {
        let form = mu.shell().form();
        if !form.degree().is_multiple_of(2) {
            return Err(Error::Precondition(format!(
                "{form} has odd degree; its shell is not symmetric"
            )));
        }
        let d = mu.dim();
        let shell_r = mu
            .points()
            .map(|y| {
                (y.iter().map(|c| (c * c) as f64).sum::<f64>())
                    .sqrt()
                    .ceil() as u64
            })
            .max()
            .unwrap_or(0);
        let input = OrbitSpace::new(d, radius, budget)?;
        let output = OrbitSpace::new(d, radius + shell_r, budget)?;
        let flat = mu.shell().flat_points().expect("full shell");
        let n_rows = output.len();
        let chunks = n_rows.div_ceil(ROW_CHUNK);
        let pieces = strategy.map_range(chunks, |c| {
            let mut scratch = vec![0u32; input.len()];
            let mut touched = Vec::new();
            let mut ptr = Vec::with_capacity(ROW_CHUNK);
            let mut cols = Vec::new();
            let mut counts = Vec::new();
            let mut diff = vec![0i64; d];
            for i in c * ROW_CHUNK..((c + 1) * ROW_CHUNK).min(n_rows) {
                let x = output.rep(i);
                for y in flat.chunks_exact(d) {
                    for k in 0..d {
                        diff[k] = x[k] - y[k];
                    }
                    if let Some(j) = input.index_of(&diff) {
                        if scratch[j] == 0 {
                            touched.push(j as u32);
                        }
                        scratch[j] += 1;
                    }
                }
                touched.sort_unstable();
                for &j in &touched {
                    cols.push(j);
                    counts.push(scratch[j as usize]);
                    scratch[j as usize] = 0;
                }
                touched.clear();
                ptr.push(cols.len());
            }
            (ptr, cols, counts)
        });
        let mut forward = Csr {
            ptr: vec![0],
            ..Csr::default()
        };
        for (ptr, cols, counts) in pieces {
            let base = forward.cols.len();
            forward.ptr.extend(ptr.into_iter().map(|p| p + base));
            forward.cols.extend(cols);
            forward.counts.extend(counts);
        }
        let backward = forward.transpose(input.len());
        Ok(SymmetricOperator {
            input,
            output,
            weight: mu.weight(),
            forward,
            backward,
            strategy,
        })
    }

    pub fn input(&self) -> &OrbitSpace {
        &self.input
    }

    pub fn output(&self) -> &OrbitSpace {
        &self.output
    }

    /// Stored nonzeros of the orbit matrix.
    pub fn nnz(&self) -> usize {
        self.forward.nnz()
    }

    /// `A_λ f` at the output representatives.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.input.len());
        self.strategy.map_range(self.output.len(), |i| {
            self.forward.row(i).map(|(j, n)| n * f[j]).sum::<f64>() * self.weight
        })
    }

    /// The adjoint for the weighted pairings `Σ w_i f_i g_i` on both sides.
    pub fn adjoint(&self, g: &[f64]) -> Vec<f64> {
        assert_eq!(g.len(), self.output.len());
        let gw: Vec<f64> = g
            .iter()
            .zip(self.output.weights())
            .map(|(a, w)| a * w)
            .collect();
        let w_in = self.input.weights();
        self.strategy.map_range(self.input.len(), |j| {
            self.backward.row(j).map(|(i, n)| n * gw[i]).sum::<f64>() * self.weight / w_in[j]
        })
    }
}
