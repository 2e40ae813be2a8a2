//! Tick ingestion, cleaning, bar aggregation and contract roll stitching.

mod bars;
mod clean;
mod roll;
mod session;
mod tick;

pub use bars::{aggregate_bars, write_bars_csv, AggregateOutcome, BarSeries};
pub use clean::{clean_ticks, CleanReport, CleanRule, SPREAD_MULTIPLE};
pub use roll::{stitch_chain, stitch_roll, LabelledDay};
pub use session::SessionSpec;
pub use tick::{parse_ticks, write_ticks_csv, ColumnMap, ParsedTicks, RowError, TickRecord};

use chrono::NaiveDate;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MarketDataError {
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("required column `{0}` not found in header")]
    MissingColumn(String),
    #[error("invalid session: {0}")]
    InvalidSession(String),
    #[error("bar width must be positive")]
    ZeroBarWidth,
    #[error("roll date {roll} missing from the incoming contract `{contract}`; it covers {first:?}..={last:?}")]
    MissingRollDay {
        roll: NaiveDate,
        contract: String,
        first: Option<NaiveDate>,
        last: Option<NaiveDate>,
    },
    #[error("roll dates must be strictly increasing ({0} follows {1})")]
    UnorderedRolls(NaiveDate, NaiveDate),
    #[error("{contracts} contracts need {expected} roll dates, got {got}")]
    RollCount {
        contracts: usize,
        expected: usize,
        got: usize,
    },
}
