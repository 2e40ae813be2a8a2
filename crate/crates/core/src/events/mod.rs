//! Epsilon-drawdown / drawup detection and event characteristics.
//!
//! A drawdown runs from a local price maximum to the following minimum and
//! only ends once the price has rebounded from that minimum by more than
//! `epsilon` (in log-return units); drawups mirror this. Consecutive events
//! alternate in kind and tile the day, each starting where the previous one
//! ended.

mod composition;
mod detect;
mod io;
mod pool;
mod series;
mod stats;

pub use composition::{contribution_ratio, count_tail_returns, tail_returns};
pub use detect::{detect_events, detect_spans, EventSpan};
pub use io::{read_events_csv, write_events_csv, write_stats_csv};
pub use pool::{pool_events, PooledEvent, PooledEvents};
pub use series::{analyze_days, characterize, day_volatility, DayVolatility, Event, EventSeries};
pub use stats::{descriptive_stats, Characteristic, DescriptiveStats};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Drawdown,
    Drawup,
}

impl EventKind {
    pub fn opposite(self) -> Self {
        match self {
            EventKind::Drawdown => EventKind::Drawup,
            EventKind::Drawup => EventKind::Drawdown,
        }
    }

    /// +1 for drawups, -1 for drawdowns.
    pub fn sign(self) -> f64 {
        match self {
            EventKind::Drawdown => -1.0,
            EventKind::Drawup => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Drawdown => "drawdown",
            EventKind::Drawup => "drawup",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EpsilonMode {
    /// `epsilon = epsilon0 * sigma` with sigma the previous day's volatility.
    Adaptive,
    /// `epsilon = epsilon0`, a constant in log-return units.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonConfig {
    pub bar_width_secs: u32,
    pub epsilon0: f64,
    pub mode: EpsilonMode,
}

impl Default for EpsilonConfig {
    fn default() -> Self {
        Self {
            bar_width_secs: 30,
            epsilon0: 1.0,
            mode: EpsilonMode::Adaptive,
        }
    }
}

impl EpsilonConfig {
    pub fn validate(&self) -> Result<(), EventError> {
        if self.bar_width_secs == 0 {
            return Err(EventError::Config("bar width must be positive".into()));
        }
        let ok = match self.mode {
            EpsilonMode::Adaptive => self.epsilon0 > 0.0,
            EpsilonMode::Fixed => self.epsilon0 >= 0.0,
        };
        if !ok || !self.epsilon0.is_finite() {
            return Err(EventError::Config(format!(
                "epsilon0 = {} invalid for {:?} mode",
                self.epsilon0, self.mode
            )));
        }
        Ok(())
    }

    /// Threshold in log-return units given the reference volatility.
    pub fn epsilon(&self, sigma: f64) -> f64 {
        match self.mode {
            EpsilonMode::Adaptive => self.epsilon0 * sigma,
            EpsilonMode::Fixed => self.epsilon0,
        }
    }
}

#[derive(Debug, Error)]
pub enum EventError {
    #[error("day {0} has no returns")]
    EmptyDay(chrono::NaiveDate),
    #[error("previous-day volatility is zero; event cannot be normalized")]
    Unnormalizable,
    #[error("no events to summarize")]
    EmptySample,
    #[error("cannot pool series built with different settings: {0}")]
    MixedConfig(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}
