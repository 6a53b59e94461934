//! Execution policy for the data-parallel loops (matrix rows, sweep points,
//! polyhedron vertices).
//!
//! With the `parallel` feature (default) work items are distributed with
//! rayon; without it, or with [`ExecPolicy::Sequential`], the same closures
//! run in order on the calling thread. Results are always returned in index
//! order, so both policies produce identical output.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecPolicy {
    Sequential,
    #[default]
    Parallel,
}

impl ExecPolicy {
    /// Whether this policy actually runs on multiple threads in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == ExecPolicy::Parallel
    }

    /// Evaluates `f(0..n)` and collects the results in index order.
    pub fn map_indexed<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == ExecPolicy::Parallel {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Fills consecutive `chunk`-sized rows of `out` with `f(row, slice)`.
    pub fn for_each_row<T, F>(self, out: &mut [T], chunk: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == ExecPolicy::Parallel {
            out.par_chunks_mut(chunk)
                .enumerate()
                .for_each(|(i, row)| f(i, row));
            return;
        }
        out.chunks_mut(chunk).enumerate().for_each(|(i, row)| f(i, row));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policies_agree() {
        let f = |i: usize| (i as f64).sqrt();
        assert_eq!(
            ExecPolicy::Sequential.map_indexed(100, f),
            ExecPolicy::Parallel.map_indexed(100, f)
        );
        let mut a = vec![0usize; 12];
        let mut b = vec![0usize; 12];
        ExecPolicy::Sequential.for_each_row(&mut a, 4, |r, row| {
            row.iter_mut().enumerate().for_each(|(c, x)| *x = r * 10 + c)
        });
        ExecPolicy::Parallel.for_each_row(&mut b, 4, |r, row| {
            row.iter_mut().enumerate().for_each(|(c, x)| *x = r * 10 + c)
        });
        assert_eq!(a, b);
    }
}
