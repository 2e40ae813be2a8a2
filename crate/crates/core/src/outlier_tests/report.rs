use serde::Serialize;

use super::{DkResult, DkVariant, ExponentialTail, UResult};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutlierEntry {
    pub rank: usize,
    pub provenance: Option<usize>,
    pub x: f64,
    pub y: f64,
    pub p: f64,
}

/// Serializable summary shared by the DK and U tests.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutlierReport {
    pub variant: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub x_m: f64,
    pub p0: f64,
    pub r: usize,
    pub inconclusive: bool,
    pub p_values: Vec<f64>,
    pub outliers: Vec<OutlierEntry>,
}

fn entry(tail: &ExponentialTail, k: usize, p: f64) -> OutlierEntry {
    OutlierEntry {
        rank: k + 1,
        provenance: tail.provenance[k],
        x: tail.x(k),
        y: tail.y[k],
        p,
    }
}

impl OutlierReport {
    /// Modified test: the `r` detected values. Original test: the largest
    /// flagged rank's values, i.e. every value any rejection covered.
    pub fn from_dk(result: &DkResult, tail: &ExponentialTail) -> Self {
        let (variant, outliers) = match result.variant {
            DkVariant::Modified => (
                "modified_dk",
                (0..result.r).map(|k| entry(tail, k, result.p_values[k])).collect(),
            ),
            DkVariant::Original => {
                let deepest = result.flagged_ranks.last().copied().unwrap_or(0);
                ("original_dk", (0..deepest).map(|k| entry(tail, k, result.p_values[k])).collect())
            }
        };
        Self {
            variant: variant.into(),
            n: result.n,
            x_m: tail.x_m,
            p0: result.p0,
            r: result.r,
            inconclusive: result.inconclusive,
            p_values: result.p_values.clone(),
            outliers,
        }
    }

    /// Ranks among the `r` tested whose `p_k` falls below `p0`.
    pub fn from_u(result: &UResult, tail: &ExponentialTail, p0: f64) -> Self {
        Self {
            variant: "u_test".into(),
            n: result.n,
            x_m: tail.x_m,
            p0,
            r: result.r,
            inconclusive: false,
            p_values: result.p_values.clone(),
            outliers: (0..result.r)
                .filter(|&k| result.p_values[k] < p0)
                .map(|k| entry(tail, k, result.p_values[k]))
                .collect(),
        }
    }
}
