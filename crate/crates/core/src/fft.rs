//! Multidimensional complex FFT on a cube `Z_M^d`, one axis at a time.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::exec::Strategy;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// In-place `d`-dimensional transform of a row-major cube of side `m`.
///
/// The inverse is normalized by `m^d`, so forward then inverse is the identity.
pub fn fft_nd(data: &mut [Complex64], d: usize, m: usize, dir: Direction, strategy: Strategy) {
    assert_eq!(data.len(), m.pow(d as u32), "data is not an m^d cube");
    if m == 1 {
        return;
    }
    let mut planner = FftPlanner::new();
    let plan = match dir {
        Direction::Forward => planner.plan_fft_forward(m),
        Direction::Inverse => planner.plan_fft_inverse(m),
    };
    let lines = data.len() / m;
    let mut buf = vec![Complex64::default(); data.len()];
    for axis in 0..d {
        let stride = m.pow((d - 1 - axis) as u32);
        if stride == 1 {
            strategy.for_each_chunk_mut(data, m * 64, |_, chunk| {
                let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
                plan.process_with_scratch(chunk, &mut scratch);
            });
            continue;
        }
        // Gather each line along `axis` into contiguous storage.
        for line in 0..lines {
            let (hi, lo) = (line / stride, line % stride);
            let base = hi * stride * m + lo;
            let dst = &mut buf[line * m..(line + 1) * m];
            for (j, v) in dst.iter_mut().enumerate() {
                *v = data[base + j * stride];
            }
        }
        strategy.for_each_chunk_mut(&mut buf, m * 64, |_, chunk| {
            let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
            plan.process_with_scratch(chunk, &mut scratch);
        });
        for line in 0..lines {
            let (hi, lo) = (line / stride, line % stride);
            let base = hi * stride * m + lo;
            for j in 0..m {
                data[base + j * stride] = buf[line * m + j];
            }
        }
    }
    if dir == Direction::Inverse {
        let scale = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|v| *v *= scale);
    }
}

/// Smallest `n >= min` whose prime factors are all in {2, 3, 5, 7}.
pub fn smooth_size(min: usize) -> usize {
    (min.max(1)..)
        .find(|&n| {
            let mut r = n;
            for p in [2, 3, 5, 7] {
                while r % p == 0 {
                    r /= p;
                }
            }
            r == 1
        })
        .expect("smooth numbers are unbounded")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sums::e;

    fn naive_dft(data: &[Complex64], d: usize, m: usize) -> Vec<Complex64> {
        let n = data.len();
        let coords = |mut i: usize| {
            let mut c = vec![0usize; d];
            for k in (0..d).rev() {
                c[k] = i % m;
                i /= m;
            }
            c
        };
        (0..n)
            .map(|k| {
                let ck = coords(k);
                (0..n)
                    .map(|j| {
                        let cj = coords(j);
                        let dot: usize = ck.iter().zip(&cj).map(|(a, b)| a * b).sum();
                        // rustfft's forward kernel is exp(-2πi jk/m) = e(jk/m)
                        data[j] * e((dot % m) as f64 / m as f64)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_transform() {
        for (d, m) in [(1usize, 7usize), (2, 5), (3, 4)] {
            let n = m.pow(d as u32);
            let data: Vec<Complex64> = (0..n)
                .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
                .collect();
            let want = naive_dft(&data, d, m);
            for s in [Strategy::Sequential, Strategy::Parallel] {
                let mut got = data.clone();
                fft_nd(&mut got, d, m, Direction::Forward, s);
                for (a, b) in got.iter().zip(&want) {
                    assert!((a - b).norm() < 1e-10);
                }
                fft_nd(&mut got, d, m, Direction::Inverse, s);
                for (a, b) in got.iter().zip(&data) {
                    assert!((a - b).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn smooth_sizes() {
        assert_eq!(smooth_size(11), 12);
        assert_eq!(smooth_size(13), 14);
        assert_eq!(smooth_size(29), 30);
        assert_eq!(smooth_size(1), 1);
    }
}
