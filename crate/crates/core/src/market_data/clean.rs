use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::Serialize;

use super::{MarketDataError, SessionSpec, TickRecord};

/// Rows whose spread exceeds this multiple of the day's median spread are dropped.
pub const SPREAD_MULTIPLE: f64 = 20.0;

/// The six row-level cleaning rules, in the order they are attributed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CleanRule {
    OutsideSession,
    ZeroPriceOrQuote,
    NegativeSpread,
    WideSpread,
    CorrectedTrade,
    OutsideQuoteBand,
}

impl CleanRule {
    pub const ALL: [CleanRule; 6] = [
        CleanRule::OutsideSession,
        CleanRule::ZeroPriceOrQuote,
        CleanRule::NegativeSpread,
        CleanRule::WideSpread,
        CleanRule::CorrectedTrade,
        CleanRule::OutsideQuoteBand,
    ];

    fn needs_quotes(self) -> bool {
        matches!(
            self,
            CleanRule::NegativeSpread | CleanRule::WideSpread | CleanRule::OutsideQuoteBand
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CleanReport {
    pub input_rows: usize,
    pub removed: BTreeMap<CleanRule, usize>,
    /// Rows that passed every rule but belong to an excluded gap day.
    pub gap_day_rows: usize,
    pub survivors: usize,
    pub excluded_days: Vec<NaiveDate>,
    pub rules_not_applied: Vec<CleanRule>,
}

impl CleanReport {
    pub fn removed_by(&self, rule: CleanRule) -> usize {
        self.removed.get(&rule).copied().unwrap_or(0)
    }

    pub fn is_balanced(&self) -> bool {
        self.removed.values().sum::<usize>() + self.gap_day_rows + self.survivors == self.input_rows
    }
}

fn violates_pointwise(t: &TickRecord, rule: CleanRule, session: &SessionSpec) -> bool {
    match rule {
        CleanRule::OutsideSession => !session.contains(&t.timestamp),
        CleanRule::ZeroPriceOrQuote => {
            t.price == 0.0 || t.bid == Some(0.0) || t.ask == Some(0.0)
        }
        CleanRule::NegativeSpread => t.spread().is_some_and(|s| s < 0.0),
        CleanRule::WideSpread => false,
        CleanRule::CorrectedTrade => t.corrected,
        CleanRule::OutsideQuoteBand => match (t.bid, t.ask) {
            (Some(bid), Some(ask)) => {
                let spread = ask - bid;
                t.price > ask + spread || t.price < bid - spread
            }
            _ => false,
        },
    }
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

/// Median spread of a day, iterated until no remaining row exceeds
/// `SPREAD_MULTIPLE` times it. Only rows passing every pointwise rule
/// contribute, which makes a second cleaning pass a no-op.
fn stable_median_spread(spreads: &[f64]) -> Option<f64> {
    let mut kept: Vec<f64> = spreads.to_vec();
    loop {
        let m = median(&mut kept)?;
        let before = kept.len();
        kept.retain(|&s| s <= SPREAD_MULTIPLE * m);
        if kept.len() == before {
            return Some(m);
        }
    }
}

/// Apply the cleaning rules to timestamp-ordered ticks and drop whole days
/// with an intra-session gap longer than `session.max_gap_secs`.
///
/// Each removed row is attributed to the first rule it fails. The wide-spread
/// rule compares against the day median over rows that pass all pointwise
/// rules; quote rules are skipped for rows without bid/ask.
pub fn clean_ticks(
    ticks: &[TickRecord],
    session: &SessionSpec,
) -> Result<(Vec<TickRecord>, CleanReport), MarketDataError> {
    session.validate()?;

    let mut by_day: BTreeMap<NaiveDate, Vec<&TickRecord>> = BTreeMap::new();
    for t in ticks {
        by_day.entry(t.timestamp.date()).or_default().push(t);
    }

    let pointwise: Vec<CleanRule> = CleanRule::ALL
        .into_iter()
        .filter(|r| *r != CleanRule::WideSpread)
        .collect();

    let mut removed: BTreeMap<CleanRule, usize> = CleanRule::ALL.iter().map(|r| (*r, 0)).collect();
    let mut gap_day_rows = 0;
    let mut excluded_days = Vec::new();
    let mut cleaned = Vec::new();

    for (day, rows) in by_day {
        let first_pointwise: Vec<Option<CleanRule>> = rows
            .iter()
            .map(|t| pointwise.iter().copied().find(|r| violates_pointwise(t, *r, session)))
            .collect();
        let spreads: Vec<f64> = rows
            .iter()
            .zip(&first_pointwise)
            .filter(|(_, v)| v.is_none())
            .filter_map(|(t, _)| t.spread())
            .collect();
        let median_spread = stable_median_spread(&spreads);

        let mut kept: Vec<&TickRecord> = Vec::with_capacity(rows.len());
        for (t, first) in rows.iter().zip(first_pointwise) {
            let wide = match (t.spread(), median_spread) {
                (Some(s), Some(m)) => s > SPREAD_MULTIPLE * m,
                _ => false,
            };
            let verdict = match first {
                Some(r) if r < CleanRule::WideSpread => Some(r),
                _ if wide => Some(CleanRule::WideSpread),
                other => other,
            };
            match verdict {
                Some(rule) => *removed.get_mut(&rule).unwrap() += 1,
                None => kept.push(t),
            }
        }

        let max_gap = chrono::TimeDelta::seconds(session.max_gap_secs as i64);
        let has_gap = kept
            .windows(2)
            .any(|w| w[1].timestamp - w[0].timestamp > max_gap);
        if has_gap {
            gap_day_rows += kept.len();
            excluded_days.push(day);
        } else {
            cleaned.extend(kept.into_iter().cloned());
        }
    }

    let any_quotes = ticks.iter().any(|t| t.spread().is_some());
    let rules_not_applied = if any_quotes {
        Vec::new()
    } else {
        CleanRule::ALL.into_iter().filter(|r| r.needs_quotes()).collect()
    };

    let report = CleanReport {
        input_rows: ticks.len(),
        removed,
        gap_day_rows,
        survivors: cleaned.len(),
        excluded_days,
        rules_not_applied,
    };
    Ok((cleaned, report))
}
