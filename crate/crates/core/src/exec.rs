//! Restart fan-out. With the `parallel` feature the indices run on the
//! rayon pool; the reduction is associative and commutative (max score,
//! ties to the lowest index), so the winner is identical to the sequential
//! fallback for the same per-index inputs.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

fn better<T>(a: (usize, f64, T), b: (usize, f64, T)) -> (usize, f64, T) {
    if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
        b
    } else {
        a
    }
}

/// Runs `f` for 0..n, scores each result, and returns the best
/// (index, score, value).
#[cfg(feature = "parallel")]
pub(crate) fn best_of<T, F, S>(n: usize, f: F, score: S) -> Option<(usize, f64, T)>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
    S: Fn(&T) -> f64 + Sync + Send,
{
    (0..n)
        .into_par_iter()
        .map(|i| {
            let v = f(i);
            let s = score(&v);
            (i, s, v)
        })
        .reduce_with(better)
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn best_of<T, F, S>(n: usize, f: F, score: S) -> Option<(usize, f64, T)>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
    S: Fn(&T) -> f64 + Sync + Send,
{
    (0..n)
        .map(|i| {
            let v = f(i);
            let s = score(&v);
            (i, s, v)
        })
        .fold(None, |acc, item| match acc {
            None => Some(item),
            Some(a) => Some(better(a, item)),
        })
}

/// Maps `f` over 0..n, in parallel when the feature is enabled.
#[cfg(feature = "parallel")]
pub(crate) fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}
