//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the work is spread over the current rayon
//! pool; without it the same functions run on the calling thread. Results
//! are always assembled in index order, and sums are reduced chunk by chunk
//! in a fixed order, so output is bit-identical for any thread count.

use crate::sum::KahanSum;

/// Fixed chunk length for deterministic reductions.
pub const CHUNK: usize = 2048;

/// Evaluates `f(0..n)` and returns the results in index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Compensated sum of `K` simultaneous series `f(i)[j]` over `i in 0..n`.
pub fn sum_indexed<const K: usize, F>(n: usize, f: F) -> [f64; K]
where
    F: Fn(usize) -> [f64; K] + Sync + Send,
{
    let chunks = n.div_ceil(CHUNK);
    let partials = map_indexed(chunks, |c| {
        let mut acc = [KahanSum::new(); K];
        for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
            let v = f(i);
            for (a, x) in acc.iter_mut().zip(v) {
                a.add(x);
            }
        }
        acc.map(|a| a.value())
    });
    let mut total = [KahanSum::new(); K];
    for p in partials {
        for (t, x) in total.iter_mut().zip(p) {
            t.add(x);
        }
    }
    total.map(|t| t.value())
}

/// Number of worker threads the helpers will use.
pub fn threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_keeps_order() {
        let v = map_indexed(10_000, |i| i * 2);
        assert!(v.iter().enumerate().all(|(i, &x)| x == 2 * i));
    }

    #[test]
    fn sum_is_chunk_stable() {
        let s = sum_indexed::<2, _>(10_001, |i| [i as f64, 1.0 / (1.0 + i as f64)]);
        assert_eq!(s[0], 10_000.0 * 10_001.0 / 2.0);
        let again = sum_indexed::<2, _>(10_001, |i| [i as f64, 1.0 / (1.0 + i as f64)]);
        assert_eq!(s[1].to_bits(), again[1].to_bits());
    }
}
