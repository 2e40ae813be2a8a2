use serde::Serialize;

use super::{Characteristic, EpsilonConfig, Event, EventError, EventKind, EventSeries};

/// An event together with the series it came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PooledEvent<'a> {
    pub series: &'a str,
    pub event: &'a Event,
}

/// Events of several series concatenated per kind, in input order.
#[derive(Debug, Clone, Serialize)]
pub struct PooledEvents<'a> {
    pub config: EpsilonConfig,
    pub drawdowns: Vec<PooledEvent<'a>>,
    pub drawups: Vec<PooledEvent<'a>>,
}

impl<'a> PooledEvents<'a> {
    pub fn of_kind(&self, kind: EventKind) -> &[PooledEvent<'a>] {
        match kind {
            EventKind::Drawdown => &self.drawdowns,
            EventKind::Drawup => &self.drawups,
        }
    }

    pub fn values(&self, kind: EventKind, field: Characteristic) -> Vec<f64> {
        self.of_kind(kind).iter().map(|p| field.of(p.event)).collect()
    }

    pub fn len(&self) -> usize {
        self.drawdowns.len() + self.drawups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Concatenate series built with the same bar width and epsilon settings.
pub fn pool_events(series: &[EventSeries]) -> Result<PooledEvents<'_>, EventError> {
    let config = series.first().map(|s| s.config).unwrap_or_default();
    let mut out = PooledEvents {
        config,
        drawdowns: Vec::new(),
        drawups: Vec::new(),
    };
    for s in series {
        if s.config != config {
            return Err(EventError::MixedConfig(format!(
                "`{}` uses {:?}, expected {:?}",
                s.contract, s.config, config
            )));
        }
        for e in &s.events {
            let p = PooledEvent {
                series: &s.contract,
                event: e,
            };
            match e.kind {
                EventKind::Drawdown => out.drawdowns.push(p),
                EventKind::Drawup => out.drawups.push(p),
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{analyze_days, EpsilonMode};
    use crate::market_data::BarSeries;
    use chrono::NaiveDate;

    fn series(label: &str, seed: u64, config: EpsilonConfig) -> EventSeries {
        let days: Vec<BarSeries> = (0..4)
            .map(|d| {
                let r: Vec<f64> = (0..300)
                    .map(|k| (((k as u64 * 2654435761 + seed * 97 + d * 13) % 1000) as f64 - 500.0) * 1e-5)
                    .collect();
                BarSeries::from_returns(NaiveDate::from_ymd_opt(2010, 3, 1 + d as u32).unwrap(), 30, 100.0, &r)
            })
            .collect();
        analyze_days(label, &days, &config).unwrap()
    }

    #[test]
    fn single_series_identity() {
        let a = series("A", 1, EpsilonConfig::default());
        let p = pool_events(std::slice::from_ref(&a)).unwrap();
        assert_eq!(p.len(), a.events.len());
        let dd: Vec<&Event> = a.events.iter().filter(|e| e.kind == EventKind::Drawdown).collect();
        assert_eq!(p.drawdowns.iter().map(|x| x.event).collect::<Vec<_>>(), dd);
    }

    #[test]
    fn sizes_add_and_max_is_max_of_maxima() {
        let a = series("A", 1, EpsilonConfig::default());
        let b = series("B", 2, EpsilonConfig::default());
        let both = [a.clone(), b.clone()];
        let p = pool_events(&both).unwrap();
        assert_eq!(p.len(), a.events.len() + b.events.len());
        let max = |v: Vec<f64>| v.into_iter().fold(f64::NEG_INFINITY, f64::max);
        for kind in [EventKind::Drawdown, EventKind::Drawup] {
            let pooled = max(p.values(kind, Characteristic::NormReturn));
            let pa = max(a.events.iter().filter(|e| e.kind == kind).map(|e| e.norm_ret).collect());
            let pb = max(b.events.iter().filter(|e| e.kind == kind).map(|e| e.norm_ret).collect());
            assert_eq!(pooled, pa.max(pb));
        }
        assert!(p.drawdowns.iter().any(|x| x.series == "B"));
    }

    #[test]
    fn mixed_configs_rejected() {
        let a = series("A", 1, EpsilonConfig::default());
        let b = series(
            "B",
            2,
            EpsilonConfig {
                epsilon0: 2.0,
                mode: EpsilonMode::Adaptive,
                bar_width_secs: 30,
            },
        );
        assert!(matches!(pool_events(&[a, b]), Err(EventError::MixedConfig(_))));
    }
}
