//! Ticks to events on a synthetic three-day contract, checking the hand-offs
//! between modules rather than any single algorithm.

use chrono::{NaiveDate, NaiveDateTime, NaiveTime, TimeDelta};
use epsdd_core::events::{analyze_days, pool_events, Characteristic, EventKind};
use epsdd_core::market_data::{
    aggregate_bars, clean_ticks, parse_ticks, write_ticks_csv, CleanRule, ColumnMap, SessionSpec, TickRecord,
};
use epsdd_core::null_model::{sample_exponential, SeededGenerator};
use epsdd_core::EpsilonConfig;

fn session() -> SessionSpec {
    SessionSpec::new(
        NaiveTime::from_hms_opt(9, 0, 0).unwrap(),
        NaiveTime::from_hms_opt(11, 0, 0).unwrap(),
    )
}

fn at(day: NaiveDate, secs: i64) -> NaiveDateTime {
    day.and_hms_opt(9, 0, 0).unwrap() + TimeDelta::seconds(secs)
}

/// A quote every 5 s with a random-walk mid price, plus a few rows each
/// cleaning rule must catch.
fn ticks() -> (Vec<TickRecord>, usize) {
    let mut out = Vec::new();
    let steps = sample_exponential(3 * 1440, 1.0, &SeededGenerator::new(21, 0)).unwrap();
    let mut mid = 1200.0;
    let mut planted = 0;
    for (d, day) in [7u32, 8, 9].iter().enumerate() {
        let day = NaiveDate::from_ymd_opt(2011, 6, *day).unwrap();
        for i in 0..1440 {
            let s = steps[d * 1440 + i];
            mid += if (i * 7 + d) % 3 == 0 { 0.25 * s } else { -0.12 * s };
            let t = at(day, 5 * i as i64 + 1);
            out.push(TickRecord::quoted(t, mid, mid - 0.25, mid + 0.25));
        }
        out.push(TickRecord::quoted(at(day, -60), mid, mid - 0.25, mid + 0.25));
        out.push(TickRecord::quoted(at(day, 333), mid, mid + 0.25, mid - 0.25));
        out.push(TickRecord::quoted(at(day, 444), 0.0, mid - 0.25, mid + 0.25));
        planted += 3;
    }
    out.sort_by_key(|t| t.timestamp);
    (out, planted)
}

#[test]
fn csv_roundtrip_clean_aggregate_detect() {
    let (raw, planted) = ticks();
    let mut buf = Vec::new();
    write_ticks_csv(&mut buf, &raw, &ColumnMap::default(), true).unwrap();
    let parsed = parse_ticks(buf.as_slice(), &ColumnMap::default(), 0).unwrap();
    assert!(parsed.errors.is_empty());
    assert_eq!(parsed.records.len(), raw.len());

    let (clean, report) = clean_ticks(&parsed.records, &session()).unwrap();
    assert!(report.is_balanced());
    assert_eq!(report.input_rows - report.survivors, planted);
    assert_eq!(report.removed_by(CleanRule::OutsideSession), 3);
    assert_eq!(report.removed_by(CleanRule::NegativeSpread), 3);
    assert_eq!(report.removed_by(CleanRule::ZeroPriceOrQuote), 3);
    assert!(report.excluded_days.is_empty());

    let bars = aggregate_bars(&clean, 30, &session()).unwrap();
    assert_eq!(bars.days.len(), 3);
    for day in &bars.days {
        assert_eq!(day.closes.len(), 240);
        assert_eq!(day.returns.len(), 239);
        let last = day.closes[0] * day.returns.iter().sum::<f64>().exp();
        assert!((last / day.closes[239] - 1.0).abs() < 1e-12);
    }

    let series = analyze_days("SYN", &bars.days, &EpsilonConfig::default()).unwrap();
    assert!(series.events.iter().all(|e| e.day != bars.days[0].day));
    assert!(!series.events.is_empty());
    for w in series.events.windows(2) {
        if w[0].day == w[1].day {
            assert_eq!(w[0].k_end, w[1].k_start);
            assert_ne!(w[0].kind, w[1].kind);
        }
    }

    let pooled = pool_events(std::slice::from_ref(&series)).unwrap();
    let dd = pooled.values(EventKind::Drawdown, Characteristic::NormReturn);
    let du = pooled.values(EventKind::Drawup, Characteristic::NormReturn);
    assert_eq!(dd.len() + du.len(), series.events.len());
}
