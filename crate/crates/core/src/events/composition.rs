use super::Event;
use crate::market_data::BarSeries;

/// Normalized magnitudes `|r_k| / sigma_prev` of the event's constituent
/// bar returns that share its polarity and reach `threshold`.
pub fn tail_returns(event: &Event, bars: &BarSeries, threshold: f64) -> Vec<f64> {
    let sign = event.kind.sign();
    bars.returns[event.k_start..event.k_end]
        .iter()
        .filter(|r| **r * sign > 0.0)
        .map(|r| r.abs() / event.sigma_prev)
        .filter(|x| *x >= threshold)
        .collect()
}

/// Number of large same-sign bar returns inside the event. `threshold` is
/// the lower bound of the per-return power-law tail, in units of the
/// previous day's volatility.
pub fn count_tail_returns(event: &Event, bars: &BarSeries, threshold: f64) -> usize {
    tail_returns(event, bars, threshold).len()
}

/// Share of the event's normalized return carried by its large returns.
/// `None` when the event holds no large return. Can exceed 1 when interior
/// counter-moves offset part of the large moves.
pub fn contribution_ratio(event: &Event, bars: &BarSeries, threshold: f64) -> Option<f64> {
    let tail = tail_returns(event, bars, threshold);
    if tail.is_empty() {
        return None;
    }
    Some(tail.iter().sum::<f64>() / event.norm_ret)
}
