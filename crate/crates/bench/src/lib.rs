//! Deterministic inputs shared by the benchmarks.

use chrono::{Days, NaiveDate, NaiveTime, TimeDelta};
use epsdd_core::market_data::{SessionSpec, TickRecord};
use epsdd_core::null_model::{sample_exponential, SeededGenerator};
use epsdd_core::BarSeries;

/// Returns with alternating sign runs and roughly exponential magnitudes.
pub fn returns(n: usize, seed: u64) -> Vec<f64> {
    sample_exponential(n, 1.0, &SeededGenerator::new(seed, 0))
        .unwrap()
        .iter()
        .enumerate()
        .map(|(i, v)| if (i / 3 + i % 2) % 2 == 0 { v * 1e-3 } else { -v * 1e-3 })
        .collect()
}

/// `n` trading days of 30 s bars over a 2 h session.
pub fn days(n: usize, seed: u64) -> Vec<BarSeries> {
    let first = NaiveDate::from_ymd_opt(2009, 1, 5).unwrap();
    (0..n)
        .map(|d| BarSeries::from_returns(first + Days::new(d as u64), 30, 1000.0, &returns(239, seed + d as u64)))
        .collect()
}

pub fn session() -> SessionSpec {
    SessionSpec::new(
        NaiveTime::from_hms_opt(9, 0, 0).unwrap(),
        NaiveTime::from_hms_opt(11, 0, 0).unwrap(),
    )
}

/// Quoted ticks every second for `n_days` days.
pub fn ticks(n_days: usize) -> Vec<TickRecord> {
    let first = NaiveDate::from_ymd_opt(2009, 1, 5).unwrap();
    let steps = returns(n_days * 7200, 3);
    let mut mid = 1000.0;
    let mut out = Vec::with_capacity(steps.len());
    for d in 0..n_days {
        let open = (first + Days::new(d as u64)).and_hms_opt(9, 0, 0).unwrap();
        for i in 0..7200 {
            mid *= 1.0 + steps[d * 7200 + i];
            out.push(TickRecord::quoted(open + TimeDelta::seconds(i as i64), mid, mid - 0.25, mid + 0.25));
        }
    }
    out
}
