use std::collections::BTreeMap;
use std::io::Write;

use chrono::{NaiveDate, NaiveDateTime, TimeDelta};
use serde::Serialize;

use super::tick::format_timestamp;
use super::{MarketDataError, SessionSpec, TickRecord};

/// Close prices of one trading day sampled every `bar_width_secs`, with the
/// log-returns between consecutive closes.
///
/// Bar `k` (1-based) ends at `session_start + k * bar_width`; `closes[i]`
/// belongs to bar `first_bar + i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BarSeries {
    pub day: NaiveDate,
    pub bar_width_secs: u32,
    pub session_start: NaiveDateTime,
    pub first_bar: usize,
    /// Number of bar boundaries the session holds, `floor(duration / width)`.
    pub n_bars: usize,
    pub closes: Vec<f64>,
    pub returns: Vec<f64>,
}

impl BarSeries {
    pub fn from_closes(
        day: NaiveDate,
        session_start: NaiveDateTime,
        bar_width_secs: u32,
        first_bar: usize,
        n_bars: usize,
        closes: Vec<f64>,
    ) -> Self {
        let returns = closes.windows(2).map(|w| w[1].ln() - w[0].ln()).collect();
        Self {
            day,
            bar_width_secs,
            session_start,
            first_bar,
            n_bars,
            closes,
            returns,
        }
    }

    /// Synthetic day built from log-returns anchored at `first_close`,
    /// used by tests and simulations where no tick data exists.
    pub fn from_returns(day: NaiveDate, bar_width_secs: u32, first_close: f64, returns: &[f64]) -> Self {
        let mut closes = Vec::with_capacity(returns.len() + 1);
        let mut log_p = first_close.ln();
        closes.push(first_close);
        for r in returns {
            log_p += r;
            closes.push(log_p.exp());
        }
        Self {
            day,
            bar_width_secs,
            session_start: day.and_hms_opt(0, 0, 0).unwrap(),
            first_bar: 1,
            n_bars: returns.len() + 1,
            closes,
            returns: returns.to_vec(),
        }
    }

    /// Wall-clock time of the close at position `i`.
    pub fn time_of(&self, i: usize) -> NaiveDateTime {
        self.session_start + TimeDelta::seconds(((self.first_bar + i) as i64) * self.bar_width_secs as i64)
    }
}

#[derive(Debug, Clone, Default)]
pub struct AggregateOutcome {
    pub days: Vec<BarSeries>,
    /// Days that had ticks but no trade at or before any bar boundary.
    pub omitted_days: Vec<NaiveDate>,
}

/// Sample each day's last trade price at every bar boundary inside the
/// session. Leading boundaries with no trade yet are skipped; later empty
/// bars repeat the previous close.
pub fn aggregate_bars(
    ticks: &[TickRecord],
    bar_width_secs: u32,
    session: &SessionSpec,
) -> Result<AggregateOutcome, MarketDataError> {
    if bar_width_secs == 0 {
        return Err(MarketDataError::ZeroBarWidth);
    }
    session.validate()?;
    let width = TimeDelta::seconds(bar_width_secs as i64);
    let n_bars = (session.duration_secs() / bar_width_secs as i64) as usize;

    let mut by_day: BTreeMap<NaiveDate, Vec<&TickRecord>> = BTreeMap::new();
    for t in ticks {
        by_day.entry(t.timestamp.date()).or_default().push(t);
    }

    let mut out = AggregateOutcome::default();
    for (day, rows) in by_day {
        let start = session.start_on(day);
        let mut closes = Vec::with_capacity(n_bars);
        let mut first_bar = None;
        let mut cursor = 0;
        let mut last_price = None;
        for k in 1..=n_bars {
            let boundary = start + width * k as i32;
            while cursor < rows.len() && rows[cursor].timestamp <= boundary {
                last_price = Some(rows[cursor].price);
                cursor += 1;
            }
            if let Some(p) = last_price {
                first_bar.get_or_insert(k);
                closes.push(p);
            }
        }
        match first_bar {
            Some(first) => out
                .days
                .push(BarSeries::from_closes(day, start, bar_width_secs, first, n_bars, closes)),
            None => out.omitted_days.push(day),
        }
    }
    Ok(out)
}

/// Bar CSV: `day,bar_index,time,close,return` (return is empty on the first bar).
pub fn write_bars_csv<W: Write>(sink: W, days: &[BarSeries]) -> Result<(), MarketDataError> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["day", "bar_index", "time", "close", "return"])?;
    for d in days {
        for (i, close) in d.closes.iter().enumerate() {
            let ret = if i == 0 { String::new() } else { d.returns[i - 1].to_string() };
            w.write_record([
                d.day.to_string(),
                (d.first_bar + i).to_string(),
                format_timestamp(&d.time_of(i)),
                close.to_string(),
                ret,
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
