//! Dragon-King tests on the upper tail of a sample.
//!
//! A Pareto tail above `x_m` becomes an exponential sample under
//! `y = ln(x / x_m)`. The DK tests compare the largest `y` values with the
//! rest through normalized spacings and an F statistic. The U-test instead
//! fits the exponential rate with the top ranks censored and asks how
//! unlikely each top order statistic is under that fit.

mod dk;
mod report;
mod utest;

pub use dk::{dk_pvalue, dk_statistic, modified_dk_test, original_dk_test, spacings, DkResult, DkVariant};
pub use report::{OutlierEntry, OutlierReport};
pub use utest::{u_test, u_test_auto, UResult};

use serde::Serialize;
use thiserror::Error;

use crate::special::SpecialError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OutlierError {
    #[error("value {value} at index {index} lies below x_m = {x_m}")]
    BelowLowerBound { index: usize, value: f64, x_m: f64 },
    #[error("x_m must be positive and finite (got {0})")]
    InvalidLowerBound(f64),
    #[error("tail has {n} points but at least {need} are required")]
    TooShort { n: usize, need: usize },
    #[error("rank {r} outside the allowed range 1..{n}")]
    Rank { r: usize, n: usize },
    #[error("tied tail: the spacing sum beyond rank {r} is zero")]
    DegenerateTail { r: usize },
    #[error("p0 must lie in (0, 1) (got {0})")]
    Threshold(f64),
    #[error(transparent)]
    Special(#[from] SpecialError),
}

/// Tail values mapped to the exponential scale, largest first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentialTail {
    /// `ln(x_i / x_m)`, descending.
    pub y: Vec<f64>,
    pub x_m: f64,
    /// Index of each `y` in the source sample; `None` marks synthetic points.
    pub provenance: Vec<Option<usize>>,
}

impl ExponentialTail {
    /// Build directly from exponential-scale values (any order), with
    /// `x_m = 1` and provenance equal to the input positions.
    pub fn from_y(y: &[f64]) -> Self {
        let mut idx: Vec<usize> = (0..y.len()).collect();
        idx.sort_by(|&a, &b| y[b].total_cmp(&y[a]));
        Self {
            y: idx.iter().map(|&i| y[i]).collect(),
            x_m: 1.0,
            provenance: idx.into_iter().map(Some).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Original-scale value of rank `i` (0-based).
    pub fn x(&self, i: usize) -> f64 {
        self.x_m * self.y[i].exp()
    }
}

/// Map every sample value (all must be at least `x_m`) to `ln(x / x_m)`.
pub fn to_exponential(sample: &[f64], x_m: f64) -> Result<ExponentialTail, OutlierError> {
    if !(x_m.is_finite() && x_m > 0.0) {
        return Err(OutlierError::InvalidLowerBound(x_m));
    }
    if let Some((index, &value)) = sample.iter().enumerate().find(|(_, v)| !(**v >= x_m)) {
        return Err(OutlierError::BelowLowerBound { index, value, x_m });
    }
    Ok(build(sample, (0..sample.len()).collect(), x_m))
}

/// The part of `sample` at or above `x_m`, mapped to the exponential scale.
pub fn tail_above(sample: &[f64], x_m: f64) -> Result<ExponentialTail, OutlierError> {
    if !(x_m.is_finite() && x_m > 0.0) {
        return Err(OutlierError::InvalidLowerBound(x_m));
    }
    let idx = (0..sample.len()).filter(|&i| sample[i] >= x_m).collect();
    Ok(build(sample, idx, x_m))
}

/// The `n` largest values, measured from the next largest one as `x_m`, so
/// that under a Pareto tail the `y` values are i.i.d. exponential.
pub fn largest(sample: &[f64], n: usize) -> Result<ExponentialTail, OutlierError> {
    if sample.len() <= n {
        return Err(OutlierError::TooShort {
            n: sample.len(),
            need: n + 1,
        });
    }
    let mut idx: Vec<usize> = (0..sample.len()).collect();
    idx.sort_by(|&a, &b| sample[b].total_cmp(&sample[a]));
    let x_m = sample[idx[n]];
    if !(x_m.is_finite() && x_m > 0.0) {
        return Err(OutlierError::InvalidLowerBound(x_m));
    }
    idx.truncate(n);
    Ok(build(sample, idx, x_m))
}

fn build(sample: &[f64], mut idx: Vec<usize>, x_m: f64) -> ExponentialTail {
    idx.sort_by(|&a, &b| sample[b].total_cmp(&sample[a]).then(a.cmp(&b)));
    ExponentialTail {
        y: idx.iter().map(|&i| (sample[i] / x_m).ln()).collect(),
        x_m,
        provenance: idx.into_iter().map(Some).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::E;

    #[test]
    fn mapping_examples() {
        assert_eq!(to_exponential(&[3.0], 3.0).unwrap().y, vec![0.0]);
        let t = to_exponential(&[E * 2.0, E * E * 2.0], 2.0).unwrap();
        assert_relative_eq!(t.y[0], 2.0, max_relative = 1e-15);
        assert_relative_eq!(t.y[1], 1.0, max_relative = 1e-15);
        assert_eq!(t.provenance, vec![Some(1), Some(0)]);
        assert_relative_eq!(t.x(0), E * E * 2.0, max_relative = 1e-15);
    }

    #[test]
    fn value_below_bound_is_named() {
        let err = to_exponential(&[2.0, 0.5], 1.0).unwrap_err();
        assert_eq!(
            err,
            OutlierError::BelowLowerBound {
                index: 1,
                value: 0.5,
                x_m: 1.0
            }
        );
    }

    #[test]
    fn largest_uses_next_value_as_bound() {
        let t = largest(&[1.0, 5.0, 2.0, 4.0, 3.0], 2).unwrap();
        assert_eq!(t.x_m, 3.0);
        assert_eq!(t.provenance, vec![Some(1), Some(3)]);
        assert!(largest(&[1.0, 2.0], 2).is_err());
        let above = tail_above(&[1.0, 5.0, 2.0, 4.0, 3.0], 3.0).unwrap();
        assert_eq!(above.len(), 3);
        assert_eq!(above.y[2], 0.0);
    }
}
