use chrono::{NaiveDate, NaiveDateTime, NaiveTime};
use serde::{Deserialize, Deserializer, Serialize};

use super::MarketDataError;

/// Active trading hours of one exchange, in exchange-local wall-clock time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSpec {
    #[serde(deserialize_with = "de_time")]
    pub ath_start: NaiveTime,
    #[serde(deserialize_with = "de_time")]
    pub ath_end: NaiveTime,
    #[serde(default)]
    pub timezone_label: String,
    /// Longest tolerated silence between consecutive cleaned rows, seconds.
    #[serde(default = "default_max_gap")]
    pub max_gap_secs: u32,
    /// Added to epoch-millisecond timestamps to obtain local wall-clock time.
    #[serde(default)]
    pub utc_offset_secs: i32,
}

fn default_max_gap() -> u32 {
    300
}

fn de_time<'de, D: Deserializer<'de>>(d: D) -> Result<NaiveTime, D::Error> {
    let s = String::deserialize(d)?;
    parse_wall_time(&s).map_err(serde::de::Error::custom)
}

pub(crate) fn parse_wall_time(s: &str) -> Result<NaiveTime, String> {
    NaiveTime::parse_from_str(s, "%H:%M:%S")
        .or_else(|_| NaiveTime::parse_from_str(s, "%H:%M"))
        .map_err(|e| format!("bad wall-clock time `{s}`: {e}"))
}

impl SessionSpec {
    pub fn new(ath_start: NaiveTime, ath_end: NaiveTime) -> Self {
        Self {
            ath_start,
            ath_end,
            timezone_label: String::new(),
            max_gap_secs: default_max_gap(),
            utc_offset_secs: 0,
        }
    }

    pub fn validate(&self) -> Result<(), MarketDataError> {
        if self.ath_start >= self.ath_end {
            return Err(MarketDataError::InvalidSession(format!(
                "ath_start {} is not before ath_end {}",
                self.ath_start, self.ath_end
            )));
        }
        if self.max_gap_secs == 0 {
            return Err(MarketDataError::InvalidSession("max_gap must be positive".into()));
        }
        Ok(())
    }

    pub fn contains(&self, ts: &NaiveDateTime) -> bool {
        let t = ts.time();
        t >= self.ath_start && t <= self.ath_end
    }

    pub fn duration_secs(&self) -> i64 {
        (self.ath_end - self.ath_start).num_seconds()
    }

    pub fn start_on(&self, day: NaiveDate) -> NaiveDateTime {
        day.and_time(self.ath_start)
    }
}
