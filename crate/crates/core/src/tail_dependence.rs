//! Empirical upper tail dependence between two paired samples.
//!
//! `lambda_u = #{x > q_x(u) and y > q_y(u)} / #{y > q_y(u)}` with empirical
//! quantiles taken as lower order statistics (see [`crate::quantile`]). Only
//! ranks matter, so the estimate is unchanged by strictly increasing
//! transforms of either variable.

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::quantile::quantile_sorted;

pub const DEFAULT_GRID: [f64; 5] = [0.90, 0.95, 0.99, 0.995, 0.999];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TailDependenceError {
    #[error("paired samples differ in length ({0} vs {1})")]
    Length(usize, usize),
    #[error("u = {0} must lie strictly between 0 and 1")]
    Level(f64),
    #[error("sample of size {n} too small for u = {u}; need at least 1/(1-u)")]
    TooSmall { n: usize, u: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaPoint {
    pub u: f64,
    /// `None` when no `y` exceeds its quantile or the sample is too small for `u`.
    pub lambda: Option<f64>,
    pub n_cond: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaCurve {
    pub points: Vec<LambdaPoint>,
}

struct Sorted {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Sorted {
    fn new(x: &[f64], y: &[f64]) -> Result<Self, TailDependenceError> {
        if x.len() != y.len() {
            return Err(TailDependenceError::Length(x.len(), y.len()));
        }
        let sort = |v: &[f64]| {
            let mut s = v.to_vec();
            s.sort_by(f64::total_cmp);
            s
        };
        Ok(Self { x: sort(x), y: sort(y) })
    }

    fn point(&self, x: &[f64], y: &[f64], u: f64) -> Result<LambdaPoint, TailDependenceError> {
        if !(u > 0.0 && u < 1.0) {
            return Err(TailDependenceError::Level(u));
        }
        let n = x.len();
        if (n as f64) * (1.0 - u) < 1.0 - 1e-9 {
            return Err(TailDependenceError::TooSmall { n, u });
        }
        let qx = quantile_sorted(&self.x, u).expect("nonempty");
        let qy = quantile_sorted(&self.y, u).expect("nonempty");
        let mut joint = 0usize;
        let mut cond = 0usize;
        for (a, b) in x.iter().zip(y) {
            if *b > qy {
                cond += 1;
                if *a > qx {
                    joint += 1;
                }
            }
        }
        Ok(LambdaPoint {
            u,
            lambda: (cond > 0).then(|| joint as f64 / cond as f64),
            n_cond: cond,
        })
    }
}

/// Estimate at a single level `u`.
pub fn lambda_u(x: &[f64], y: &[f64], u: f64) -> Result<LambdaPoint, TailDependenceError> {
    Sorted::new(x, y)?.point(x, y, u)
}

/// Estimates over a grid of levels, sharing one sort of each sample. Levels
/// too high for the sample size yield an undefined point instead of an error.
pub fn lambda_curve(x: &[f64], y: &[f64], grid: &[f64]) -> Result<LambdaCurve, TailDependenceError> {
    let sorted = Sorted::new(x, y)?;
    let points = grid
        .iter()
        .map(|&u| match sorted.point(x, y, u) {
            Err(TailDependenceError::TooSmall { .. }) => Ok(LambdaPoint {
                u,
                lambda: None,
                n_cond: 0,
            }),
            other => other,
        })
        .collect::<Result<_, _>>()?;
    Ok(LambdaCurve { points })
}

/// CSV with columns `u, lambda, n_cond`; undefined estimates are left empty.
pub fn write_curve_csv<W: Write>(mut sink: W, curve: &LambdaCurve) -> std::io::Result<()> {
    writeln!(sink, "u,lambda,n_cond")?;
    for p in &curve.points {
        match p.lambda {
            Some(l) => writeln!(sink, "{},{},{}", p.u, l, p.n_cond)?,
            None => writeln!(sink, "{},,{}", p.u, p.n_cond)?,
        }
    }
    Ok(())
}
