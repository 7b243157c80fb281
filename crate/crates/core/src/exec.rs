//! Map helpers for the embarrassingly parallel sweeps.
//!
//! Every sweep in the crate routes through [`map_collect`]: with the
//! `parallel` feature (default) it fans out over rayon, otherwise it falls
//! back to [`map_collect_seq`]. The sequential version is always compiled so
//! benchmarks can compare the two on identical workloads. Inputs are
//! generated up front and mapped in order, so results are identical for any
//! thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, in parallel when the `parallel` feature is on.
pub fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_collect_seq(items, f)
    }
}

/// Sequential twin of [`map_collect`].
pub fn map_collect_seq<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Maps `f` over `items` and returns the maximum of the resulting reals.
///
/// NaNs are treated as larger than anything so they cannot be masked.
pub fn map_max<T, F>(items: &[T], f: F) -> f64
where
    T: Sync,
    F: Fn(&T) -> f64 + Sync + Send,
{
    map_collect(items, f)
        .into_iter()
        .fold(f64::NEG_INFINITY, max_nan_aware)
}

fn max_nan_aware(a: f64, b: f64) -> f64 {
    if b.is_nan() || b > a {
        b
    } else {
        a
    }
}

/// Caps the global rayon pool from the `LATTICEFD_THREADS` env var.
///
/// No-op when the variable is unset, unparsable, or the pool already exists.
pub fn init_thread_cap_from_env() {
    #[cfg(feature = "parallel")]
    {
        if let Ok(s) = std::env::var("LATTICEFD_THREADS") {
            if let Ok(n) = s.trim().parse::<usize>() {
                if n >= 1 {
                    let _ = rayon::ThreadPoolBuilder::new()
                        .num_threads(n)
                        .build_global();
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn par_and_seq_agree() {
        let items: Vec<u64> = (0..1000).collect();
        let f = |x: &u64| (*x as f64).sqrt();
        assert_eq!(map_collect(&items, f), map_collect_seq(&items, f));
    }

    #[test]
    fn map_max_handles_nan() {
        assert!(map_max(&[1.0f64, f64::NAN, 0.5], |x| *x).is_nan());
        assert_eq!(map_max(&[1.0f64, 3.0, 0.5], |x| *x), 3.0);
    }
}
