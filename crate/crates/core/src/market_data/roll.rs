use chrono::NaiveDate;
use serde::Serialize;

use super::{BarSeries, MarketDataError};

/// One day of a continuous series, tagged with the contract it came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelledDay {
    pub contract: String,
    pub series: BarSeries,
}

/// Switch from `front` to `next` at `roll`: days strictly before the roll
/// come from `front`, days on or after it from `next`. Prices are not
/// adjusted across the switch; returns never straddle days.
pub fn stitch_roll(
    front: &[LabelledDay],
    next: &[LabelledDay],
    roll: NaiveDate,
) -> Result<Vec<LabelledDay>, MarketDataError> {
    if !next.iter().any(|d| d.series.day == roll) {
        return Err(MarketDataError::MissingRollDay {
            roll,
            contract: next.first().map(|d| d.contract.clone()).unwrap_or_default(),
            first: next.first().map(|d| d.series.day),
            last: next.last().map(|d| d.series.day),
        });
    }
    let mut out: Vec<LabelledDay> = front.iter().filter(|d| d.series.day < roll).cloned().collect();
    out.extend(next.iter().filter(|d| d.series.day >= roll).cloned());
    Ok(out)
}

/// Fold consecutive maturities into one series; `rolls[i]` is the switch
/// from `contracts[i]` to `contracts[i + 1]`.
pub fn stitch_chain(
    contracts: Vec<(String, Vec<BarSeries>)>,
    rolls: &[NaiveDate],
) -> Result<Vec<LabelledDay>, MarketDataError> {
    let expected = contracts.len().saturating_sub(1);
    if rolls.len() != expected {
        return Err(MarketDataError::RollCount {
            contracts: contracts.len(),
            expected,
            got: rolls.len(),
        });
    }
    for w in rolls.windows(2) {
        if w[1] <= w[0] {
            return Err(MarketDataError::UnorderedRolls(w[1], w[0]));
        }
    }
    let mut parts = contracts.into_iter().map(|(label, days)| {
        days.into_iter()
            .map(|series| LabelledDay {
                contract: label.clone(),
                series,
            })
            .collect::<Vec<_>>()
    });
    let mut acc = parts.next().unwrap_or_default();
    for (next, roll) in parts.zip(rolls) {
        acc = stitch_roll(&acc, &next, *roll)?;
    }
    Ok(acc)
}
