//! Empirical quantiles as lower order statistics.
//!
//! `q(p)` is the `ceil(p * n)`-th smallest value (1-based, at least the
//! first). No interpolation is done, so lattice-valued samples such as
//! durations in multiples of the bar width always map to observed values.

/// Index (0-based) of the order statistic used for probability `p` in a
/// sample of size `n`. `n` must be positive.
pub fn order_index(p: f64, n: usize) -> usize {
    debug_assert!(n > 0);
    // Guard against p * n landing a hair above an integer, e.g. 0.1 * 30.
    let pos = (p * n as f64 - 1e-9).ceil();
    (pos.max(1.0) as usize).min(n) - 1
}

/// Quantile of an ascending-sorted slice.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    Some(sorted[order_index(p, sorted.len())])
}

/// Quantile of an unsorted sample.
pub fn quantile(sample: &[f64], p: f64) -> Option<f64> {
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, p)
}
