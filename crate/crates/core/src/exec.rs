//! Serial and data-parallel execution of per-index kernels.
//!
//! Every kernel writes slot `i` of its output from a pure function of `i`, so
//! the serial and parallel paths produce bitwise-identical results. Without the
//! `parallel` feature, [`Execution::Parallel`] runs serially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

impl Execution {
    /// True when this build can actually run kernels on the rayon pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Fills `out[i] = kernel(i)` for every index.
pub fn fill<T, F>(exec: Execution, out: &mut [T], kernel: F)
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        out.par_iter_mut()
            .enumerate()
            .for_each(|(i, slot)| *slot = kernel(i));
        return;
    }
    let _ = exec;
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = kernel(i);
    }
}

/// Like [`fill`], but the kernel may fail. On failure the error of the lowest
/// failing index is returned, independent of scheduling.
pub fn try_fill<T, E, F>(exec: Execution, out: &mut [T], kernel: F) -> Result<(), E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        let results: Vec<Result<T, E>> = (0..out.len()).into_par_iter().map(&kernel).collect();
        for (slot, r) in out.iter_mut().zip(results) {
            *slot = r?;
        }
        return Ok(());
    }
    let _ = exec;
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = kernel(i)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serial_and_parallel_agree() {
        let mut a = vec![0.0f64; 1000];
        let mut b = vec![0.0f64; 1000];
        let k = |i: usize| (i as f64).sqrt().sin();
        fill(Execution::Serial, &mut a, k);
        fill(Execution::Parallel, &mut b, k);
        assert_eq!(a, b);
    }

    #[test]
    fn try_fill_reports_lowest_failing_index() {
        let mut out = vec![0usize; 100];
        let r = try_fill(Execution::Parallel, &mut out, |i| {
            if i % 30 == 29 {
                Err(i)
            } else {
                Ok(i)
            }
        });
        assert_eq!(r, Err(29));
    }
}
