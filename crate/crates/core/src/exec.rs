//! Data-parallel execution with a sequential fallback.
//!
//! Every parallel path in the crate goes through [`Strategy`]. With the
//! `parallel` feature disabled, `Strategy::Parallel` silently runs the
//! sequential code, so results never depend on the build configuration.
//! Outputs are always collected in index order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Sequential,
    Parallel,
}

impl Default for Strategy {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Strategy::Parallel
        } else {
            Strategy::Sequential
        }
    }
}

impl Strategy {
    /// Maps `f` over `0..n`, returning results in index order.
    pub fn map_range<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Strategy::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }

    /// Maps `f` over a slice, returning results in order.
    pub fn map<S, T, F>(self, items: &[S], f: F) -> Vec<T>
    where
        S: Sync,
        T: Send,
        F: Fn(&S) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Strategy::Parallel => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }

    /// Runs `f(chunk_index, chunk)` over consecutive mutable chunks of `data`.
    pub fn for_each_chunk_mut<T, F>(self, data: &mut [T], chunk: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        let chunk = chunk.max(1);
        match self {
            #[cfg(feature = "parallel")]
            Strategy::Parallel => data
                .par_chunks_mut(chunk)
                .enumerate()
                .for_each(|(i, c)| f(i, c)),
            _ => data
                .chunks_mut(chunk)
                .enumerate()
                .for_each(|(i, c)| f(i, c)),
        }
    }

    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Strategy::Parallel
    }
}

/// Sizes the global worker pool; a no-op without the `parallel` feature.
pub fn init_threads(n: usize) -> crate::error::Result<()> {
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| crate::error::Error::Precondition(format!("thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategies_agree() {
        let a = Strategy::Sequential.map_range(1000, |i| (i * i) as u64);
        let b = Strategy::Parallel.map_range(1000, |i| (i * i) as u64);
        assert_eq!(a, b);

        let mut x = vec![0usize; 97];
        let mut y = vec![0usize; 97];
        Strategy::Sequential.for_each_chunk_mut(&mut x, 10, |c, s| {
            s.iter_mut().enumerate().for_each(|(j, v)| *v = c * 10 + j)
        });
        Strategy::Parallel.for_each_chunk_mut(&mut y, 10, |c, s| {
            s.iter_mut().enumerate().for_each(|(j, v)| *v = c * 10 + j)
        });
        assert_eq!(x, y);
        assert_eq!(x[96], 96);
    }
}
