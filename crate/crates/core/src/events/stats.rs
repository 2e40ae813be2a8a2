use serde::{Deserialize, Serialize};

use super::{Event, EventError};
use crate::quantile::quantile_sorted;

/// Event characteristic selectable for summaries, fits and dependence curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Characteristic {
    Duration,
    Size,
    #[serde(rename = "ret")]
    Return,
    #[serde(rename = "norm_ret")]
    NormReturn,
    Speed,
    NormSpeed,
}

impl Characteristic {
    pub fn of(self, e: &Event) -> f64 {
        match self {
            Characteristic::Duration => e.duration,
            Characteristic::Size => e.size,
            Characteristic::Return => e.ret,
            Characteristic::NormReturn => e.norm_ret,
            Characteristic::Speed => e.speed,
            Characteristic::NormSpeed => e.norm_speed,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Characteristic::Duration => "duration",
            Characteristic::Size => "size",
            Characteristic::Return => "ret",
            Characteristic::NormReturn => "norm_ret",
            Characteristic::Speed => "speed",
            Characteristic::NormSpeed => "norm_speed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DescriptiveStats {
    pub count: usize,
    pub median: f64,
    pub q90: f64,
    pub max: f64,
}

/// Count, median, 90% quantile and maximum of one characteristic, with
/// quantiles taken as lower order statistics (see [`crate::quantile`]).
pub fn descriptive_stats<'a, I>(events: I, field: Characteristic) -> Result<DescriptiveStats, EventError>
where
    I: IntoIterator<Item = &'a Event>,
{
    let mut v: Vec<f64> = events.into_iter().map(|e| field.of(e)).collect();
    if v.is_empty() {
        return Err(EventError::EmptySample);
    }
    v.sort_by(f64::total_cmp);
    Ok(DescriptiveStats {
        count: v.len(),
        median: quantile_sorted(&v, 0.5).unwrap(),
        q90: quantile_sorted(&v, 0.9).unwrap(),
        max: *v.last().unwrap(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::EventKind;
    use chrono::NaiveDate;

    #[test]
    fn serialized_names_match_column_names() {
        use Characteristic::*;
        for c in [Duration, Size, Return, NormReturn, Speed, NormSpeed] {
            assert_eq!(serde_json::to_value(c).unwrap(), c.as_str());
        }
    }

    pub(crate) fn event_with_duration(duration: f64) -> Event {
        let day = NaiveDate::from_ymd_opt(2010, 1, 4).unwrap();
        Event {
            contract: "T".into(),
            kind: EventKind::Drawdown,
            day,
            start: day.and_hms_opt(9, 0, 0).unwrap(),
            k_start: 0,
            k_end: (duration / 30.0) as usize,
            duration,
            size: 1.0,
            ret: 0.01,
            norm_ret: 2.0,
            speed: 0.01 / duration,
            norm_speed: 2.0 / duration,
            sigma_prev: 0.005,
        }
    }

    #[test]
    fn singleton() {
        let e = [event_with_duration(120.0)];
        let s = descriptive_stats(&e, Characteristic::Duration).unwrap();
        assert_eq!((s.count, s.median, s.q90, s.max), (1, 120.0, 120.0, 120.0));
    }

    #[test]
    fn lattice_durations_use_lower_order_statistic() {
        let e: Vec<Event> = (1..=10).map(|i| event_with_duration(30.0 * i as f64)).collect();
        let s = descriptive_stats(&e, Characteristic::Duration).unwrap();
        assert_eq!(s.median, 150.0);
        assert_eq!(s.q90, 270.0);
        assert_eq!(s.max, 300.0);
    }

    #[test]
    fn empty_is_error() {
        let e: Vec<Event> = Vec::new();
        assert!(matches!(descriptive_stats(&e, Characteristic::Size), Err(EventError::EmptySample)));
    }
}
