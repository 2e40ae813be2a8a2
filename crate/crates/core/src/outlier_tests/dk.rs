use serde::{Deserialize, Serialize};

use super::{ExponentialTail, OutlierError};
use crate::special::f_sf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DkVariant {
    Original,
    Modified,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DkResult {
    pub variant: DkVariant,
    pub n: usize,
    pub p0: f64,
    pub r_max: usize,
    /// Modified test: number of detected outliers. Original test: number of
    /// ranks rejected.
    pub r: usize,
    /// Modified test only: no rank up to `r_max` satisfies the system of
    /// inequalities and the full tail is itself rejected.
    pub inconclusive: bool,
    /// Modified test: `p_1 .. p_{r+1}` for the reported `r` (the last entry is
    /// the trimmed-tail p-value). Original test: `p(r)` for `r = 1..r_max`.
    pub p_values: Vec<f64>,
    /// Modified test: `p(1)` of the tail trimmed of its `j` largest values,
    /// `j = 0..=r_max`. Original test: empty.
    pub trimmed_p_values: Vec<f64>,
    /// Original test: ranks with `p(r) < p0`.
    pub flagged_ranks: Vec<usize>,
}

/// Normalized spacings `z_i = i (y_i - y_{i+1})` with `z_N = N y_N`, for
/// descending `y`. Under an exponential law they are i.i.d. exponential.
pub fn spacings(y: &[f64]) -> Result<Vec<f64>, OutlierError> {
    let n = y.len();
    if n < 2 {
        return Err(OutlierError::TooShort { n, need: 2 });
    }
    let mut z: Vec<f64> = (0..n - 1).map(|i| (i + 1) as f64 * (y[i] - y[i + 1])).collect();
    z.push(n as f64 * y[n - 1]);
    Ok(z)
}

/// `T = (mean of z_1..z_r) / (mean of z_{r+1}..z_N)`.
pub fn dk_statistic(z: &[f64], r: usize) -> Result<f64, OutlierError> {
    let n = z.len();
    if r == 0 || r >= n {
        return Err(OutlierError::Rank { r, n });
    }
    let head: f64 = z[..r].iter().sum();
    let rest: f64 = z[r..].iter().sum();
    ratio(head, rest, r, n)
}

fn ratio(head: f64, rest: f64, r: usize, n: usize) -> Result<f64, OutlierError> {
    if !(rest > 0.0) {
        return Err(OutlierError::DegenerateTail { r });
    }
    Ok(head / rest * (n - r) as f64 / r as f64)
}

/// Upper-tail probability of `T` under `F(2r, 2N - 2r)`.
pub fn dk_pvalue(t: f64, r: usize, n: usize) -> Result<f64, OutlierError> {
    if r == 0 || r >= n {
        return Err(OutlierError::Rank { r, n });
    }
    Ok(f_sf(t, 2.0 * r as f64, 2.0 * (n - r) as f64)?)
}

fn check(tail: &ExponentialTail, p0: f64, r_max: usize) -> Result<(), OutlierError> {
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(OutlierError::Threshold(p0));
    }
    if r_max == 0 {
        return Err(OutlierError::Rank { r: 0, n: tail.len() });
    }
    if tail.len() < r_max + 2 {
        return Err(OutlierError::TooShort {
            n: tail.len(),
            need: r_max + 2,
        });
    }
    Ok(())
}

/// The classical procedure: for every `r = 1..r_max` test the `r` largest
/// values jointly against the whole tail, and flag each `r` with
/// `p(r) < p0`. A single large outlier inflates every `T(r)` that includes
/// it, so this variant tends to flag many ranks at once.
pub fn original_dk_test(tail: &ExponentialTail, p0: f64, r_max: usize) -> Result<DkResult, OutlierError> {
    check(tail, p0, r_max)?;
    let n = tail.len();
    let z = spacings(&tail.y)?;
    let total: f64 = z.iter().sum();
    let mut head = 0.0;
    let mut p_values = Vec::with_capacity(r_max);
    for r in 1..=r_max {
        head += z[r - 1];
        let t = ratio(head, total - head, r, n)?;
        p_values.push(dk_pvalue(t, r, n)?);
    }
    let flagged_ranks: Vec<usize> = (1..=r_max).filter(|r| p_values[r - 1] < p0).collect();
    Ok(DkResult {
        variant: DkVariant::Original,
        n,
        p0,
        r_max,
        r: flagged_ranks.len(),
        inconclusive: false,
        p_values,
        trimmed_p_values: Vec::new(),
        flagged_ranks,
    })
}

/// Precomputed suffix sums so that `p(1)` of any "one value plus a
/// trimmed tail" set costs O(1). For a descending set `s` of size `M`,
/// the spacings telescope: `z_1 = s_1 - s_2` and the remaining spacings add
/// up to `sum(s) - z_1`.
struct Trimmed<'a> {
    y: &'a [f64],
    suffix: Vec<f64>,
}

impl<'a> Trimmed<'a> {
    fn new(y: &'a [f64]) -> Self {
        let mut suffix = vec![0.0; y.len() + 1];
        for i in (0..y.len()).rev() {
            suffix[i] = suffix[i + 1] + y[i];
        }
        Self { y, suffix }
    }

    /// `p(1)` of `{top} ∪ y[from..]`.
    fn p_one(&self, top: f64, from: usize) -> Result<f64, OutlierError> {
        let m = self.y.len() - from + 1;
        let z1 = top - self.y[from];
        // (top + S_from) - (top - y_from)
        let rest = self.suffix[from] + self.y[from];
        let t = ratio(z1, rest, 1, m)?;
        dk_pvalue(t, 1, m)
    }

    /// `p(1)` of the tail with its `j` largest values removed.
    fn p_trimmed(&self, j: usize) -> Result<f64, OutlierError> {
        let m = self.y.len() - j;
        let z1 = self.y[j] - self.y[j + 1];
        let rest = self.suffix[j] - z1;
        let t = ratio(z1, rest, 1, m)?;
        dk_pvalue(t, 1, m)
    }
}

/// Sequential test that checks each candidate outlier on its own against
/// the tail stripped of all candidates, which avoids both the masking of a
/// large outlier by a slightly smaller one and the spill-over of a single
/// outlier onto many ranks.
///
/// The reported `r` is the smallest `r >= 1` for which every
/// `p(1; y_k, y_{r+1}, .., y_N)` with `k <= r` is below `p0` while the
/// trimmed tail `y_{r+1}, .., y_N` is itself accepted. When no such `r`
/// exists up to `r_max`, the result is `r = 0` if the full tail is accepted
/// and inconclusive otherwise.
pub fn modified_dk_test(tail: &ExponentialTail, p0: f64, r_max: usize) -> Result<DkResult, OutlierError> {
    check(tail, p0, r_max)?;
    let n = tail.len();
    let tr = Trimmed::new(&tail.y);
    let trimmed_p_values: Vec<f64> = (0..=r_max).map(|j| tr.p_trimmed(j)).collect::<Result<_, _>>()?;

    let mut found = None;
    for r in 1..=r_max {
        if trimmed_p_values[r] < p0 {
            continue;
        }
        // p_k only grows as y_k shrinks, so p_r is the largest of p_1..p_r
        if tr.p_one(tail.y[r - 1], r)? < p0 {
            let p: Vec<f64> = (0..r).map(|k| tr.p_one(tail.y[k], r)).collect::<Result<_, _>>()?;
            debug_assert!(p.iter().all(|v| *v < p0));
            found = Some((r, p));
            break;
        }
    }
    let (r, p_values, inconclusive) = match found {
        Some((r, mut p)) => {
            p.push(trimmed_p_values[r]);
            (r, p, false)
        }
        None => (0, vec![trimmed_p_values[0]], trimmed_p_values[0] < p0),
    };
    Ok(DkResult {
        variant: DkVariant::Modified,
        n,
        p0,
        r_max,
        r,
        inconclusive,
        p_values,
        trimmed_p_values,
        flagged_ranks: Vec::new(),
    })
}
