use std::io::{Read, Write};

use super::{Characteristic, DescriptiveStats, Event, EventError, EventKind};

/// Event CSV, one row per event with every characteristic.
pub fn write_events_csv<'a, W, I>(sink: W, events: I) -> Result<(), EventError>
where
    W: Write,
    I: IntoIterator<Item = &'a Event>,
{
    let mut w = csv::Writer::from_writer(sink);
    for e in events {
        w.serialize(e)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads [`write_events_csv`] output; lines starting with `#` are skipped.
pub fn read_events_csv<R: Read>(source: R) -> Result<Vec<Event>, EventError> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(source);
    let mut out = Vec::new();
    for row in r.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

/// Descriptive-statistics table: one row per (kind, characteristic).
pub fn write_stats_csv<W: Write>(
    sink: W,
    rows: &[(EventKind, Characteristic, DescriptiveStats)],
) -> Result<(), EventError> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["kind", "characteristic", "count", "median", "q90", "max"])?;
    for (kind, field, s) in rows {
        w.write_record([
            kind.as_str().to_string(),
            field.as_str().to_string(),
            s.count.to_string(),
            s.median.to_string(),
            s.q90.to_string(),
            s.max.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{analyze_days, EpsilonConfig};
    use crate::market_data::BarSeries;
    use chrono::NaiveDate;

    #[test]
    fn roundtrip_with_comment_header() {
        let r: Vec<f64> = (0..200).map(|i| ((i * 7919 % 101) as f64 - 50.0) * 1e-4).collect();
        let days: Vec<BarSeries> = (3..6)
            .map(|d| BarSeries::from_returns(NaiveDate::from_ymd_opt(2010, 5, d).unwrap(), 30, 1000.0, &r))
            .collect();
        let s = analyze_days("ES", &days, &EpsilonConfig::default()).unwrap();
        assert!(!s.events.is_empty());
        let mut buf = b"# provenance line\n".to_vec();
        write_events_csv(&mut buf, &s.events).unwrap();
        assert_eq!(read_events_csv(buf.as_slice()).unwrap(), s.events);
    }
}
