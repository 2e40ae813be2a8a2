use chrono::{NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use super::{detect_events, EpsilonConfig, EventError, EventKind, EventSpan};
use crate::market_data::BarSeries;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DayVolatility {
    pub day: NaiveDate,
    /// Uncentered RMS of the day's per-bar log-returns (not scaled by the bar width).
    pub sigma: f64,
}

/// `sigma = sqrt(mean(r_k^2))` over the day's returns.
///
/// The squares are summed in ascending order, so the result depends only on
/// the multiset of returns and is bitwise unchanged by any reordering.
pub fn day_volatility(bars: &BarSeries) -> Result<DayVolatility, EventError> {
    if bars.returns.is_empty() {
        return Err(EventError::EmptyDay(bars.day));
    }
    let n = bars.returns.len() as f64;
    let mut squares: Vec<f64> = bars.returns.iter().map(|r| r * r).collect();
    squares.sort_by(f64::total_cmp);
    let sigma = (squares.iter().sum::<f64>() / n).sqrt();
    Ok(DayVolatility { day: bars.day, sigma })
}

/// A characterized drawdown or drawup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub contract: String,
    pub kind: EventKind,
    pub day: NaiveDate,
    pub start: NaiveDateTime,
    pub k_start: usize,
    pub k_end: usize,
    /// Duration in seconds, a multiple of the bar width.
    pub duration: f64,
    /// Absolute price change in monetary units.
    pub size: f64,
    /// Absolute log-price change.
    pub ret: f64,
    pub norm_ret: f64,
    /// Per second.
    pub speed: f64,
    pub norm_speed: f64,
    /// Previous trading day's volatility used for normalization.
    pub sigma_prev: f64,
}

/// Fill in duration, size, return, speed and their normalized forms.
pub fn characterize(
    span: &EventSpan,
    bars: &BarSeries,
    sigma_prev: &DayVolatility,
    contract: &str,
) -> Result<Event, EventError> {
    if !(sigma_prev.sigma > 0.0) {
        return Err(EventError::Unnormalizable);
    }
    let p_start = bars.closes[span.k_start];
    let p_end = bars.closes[span.k_end];
    let duration = (span.bars() as f64) * bars.bar_width_secs as f64;
    let ret = (p_end.ln() - p_start.ln()).abs();
    let norm_ret = ret / sigma_prev.sigma;
    Ok(Event {
        contract: contract.to_string(),
        kind: span.kind,
        day: bars.day,
        start: bars.time_of(span.k_start),
        k_start: span.k_start,
        k_end: span.k_end,
        duration,
        size: (p_end - p_start).abs(),
        ret,
        norm_ret,
        speed: ret / duration,
        norm_speed: norm_ret / duration,
        sigma_prev: sigma_prev.sigma,
    })
}

/// Events of one continuous series under one configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventSeries {
    pub contract: String,
    pub config: EpsilonConfig,
    pub events: Vec<Event>,
    /// Events dropped because the previous day's volatility was zero.
    pub unnormalizable: usize,
}

/// Run detection over consecutive trading days. Each day is normalized by
/// the volatility of the preceding day in `days`, so the first day only
/// seeds the volatility and contributes no events.
pub fn analyze_days(contract: &str, days: &[BarSeries], config: &EpsilonConfig) -> Result<EventSeries, EventError> {
    config.validate()?;
    let mut out = EventSeries {
        contract: contract.to_string(),
        config: *config,
        events: Vec::new(),
        unnormalizable: 0,
    };
    for pair in days.windows(2) {
        let (prev, today) = (&pair[0], &pair[1]);
        if today.bar_width_secs != config.bar_width_secs {
            return Err(EventError::Config(format!(
                "day {} has {} s bars but the configuration expects {} s",
                today.day, today.bar_width_secs, config.bar_width_secs
            )));
        }
        let Ok(sigma_prev) = day_volatility(prev) else {
            continue;
        };
        if today.returns.is_empty() {
            continue;
        }
        let epsilon = config.epsilon(sigma_prev.sigma);
        for span in detect_events(today, epsilon) {
            match characterize(&span, today, &sigma_prev, contract) {
                Ok(ev) => out.events.push(ev),
                Err(EventError::Unnormalizable) => out.unnormalizable += 1,
                Err(e) => return Err(e),
            }
        }
    }
    Ok(out)
}
