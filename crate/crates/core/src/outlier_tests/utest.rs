use serde::Serialize;

use super::{ExponentialTail, OutlierError};
use crate::special::beta_reg;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UResult {
    pub n: usize,
    /// Number of top ranks censored in the fit and tested.
    pub r: usize,
    pub alpha_censored: f64,
    /// `p_k` for `k = 1..r`.
    pub p_values: Vec<f64>,
}

/// Exponential rate fitted with the `r` largest values right-censored at
/// `y_{r+1}`, then the probability that the `k`-th largest of `N` draws from
/// that law is at least `y_k`:
///
/// `alpha = (N - r) / (r y_{r+1} + sum_{k > r} y_k)`,
/// `p_k = 1 - I_{F(y_k)}(N - k + 1, k)`.
pub fn u_test(tail: &ExponentialTail, r: usize) -> Result<UResult, OutlierError> {
    let n = tail.len();
    if n < 2 || r + 1 >= n {
        return Err(OutlierError::Rank { r, n });
    }
    let y = &tail.y;
    let denom = r as f64 * y[r] + y[r..].iter().sum::<f64>();
    if !(denom > 0.0) {
        return Err(OutlierError::DegenerateTail { r });
    }
    let alpha = (n - r) as f64 / denom;
    let p_values = (1..=r)
        .map(|k| {
            // 1 - I_F(a, b) = I_{1-F}(b, a) keeps small p-values accurate
            let sf = (-alpha * y[k - 1]).exp();
            beta_reg(k as f64, (n - k + 1) as f64, sf).map_err(OutlierError::from)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(UResult {
        n,
        r,
        alpha_censored: alpha,
        p_values,
    })
}

/// Automatic rank choice (an extension; the rank is normally picked by the
/// analyst). Every `r` in `1..=r_max` is refitted and the largest `r` whose
/// own `p_r` falls below `p0` is kept, or `0` if none does.
pub fn u_test_auto(tail: &ExponentialTail, p0: f64, r_max: usize) -> Result<UResult, OutlierError> {
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(OutlierError::Threshold(p0));
    }
    let mut best = 0;
    for r in 1..=r_max.min(tail.len().saturating_sub(2)) {
        let res = u_test(tail, r)?;
        if res.p_values[r - 1] < p0 {
            best = r;
        }
    }
    u_test(tail, best)
}
