use std::io::{Read, Write};

use chrono::{DateTime, NaiveDateTime, TimeDelta};
use serde::{Deserialize, Serialize};

use super::MarketDataError;

/// One raw trade/quote row. Times are exchange-local wall clock at
/// millisecond resolution; a zero price or quote means "absent".
#[derive(Debug, Clone, PartialEq)]
pub struct TickRecord {
    pub timestamp: NaiveDateTime,
    pub price: f64,
    pub bid: Option<f64>,
    pub ask: Option<f64>,
    pub volume: f64,
    pub corrected: bool,
}

impl TickRecord {
    pub fn trade(timestamp: NaiveDateTime, price: f64) -> Self {
        Self {
            timestamp,
            price,
            bid: None,
            ask: None,
            volume: 0.0,
            corrected: false,
        }
    }

    pub fn quoted(timestamp: NaiveDateTime, price: f64, bid: f64, ask: f64) -> Self {
        Self {
            bid: Some(bid),
            ask: Some(ask),
            ..Self::trade(timestamp, price)
        }
    }

    pub fn spread(&self) -> Option<f64> {
        match (self.bid, self.ask) {
            (Some(b), Some(a)) => Some(a - b),
            _ => None,
        }
    }
}

/// Header names of the tick CSV columns. Optional columns may be absent
/// from the file; bid/ask absence disables the quote-based cleaning rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnMap {
    pub timestamp: String,
    pub price: String,
    pub bid: Option<String>,
    pub ask: Option<String>,
    pub volume: Option<String>,
    pub corrected: Option<String>,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            timestamp: "timestamp".into(),
            price: "price".into(),
            bid: Some("bid".into()),
            ask: Some("ask".into()),
            volume: Some("volume".into()),
            corrected: Some("corrected".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowError {
    /// 1-based line number in the source, counting the header as line 1.
    pub line: u64,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedTicks {
    pub records: Vec<TickRecord>,
    pub errors: Vec<RowError>,
    /// Whether both bid and ask columns were present in the header.
    pub has_quotes: bool,
}

struct Indices {
    timestamp: usize,
    price: usize,
    bid: Option<usize>,
    ask: Option<usize>,
    volume: Option<usize>,
    corrected: Option<usize>,
}

/// Parse a headed tick CSV. Malformed rows are reported individually and
/// skipped; the surviving records are stably sorted by timestamp.
///
/// `utc_offset_secs` shifts epoch-millisecond timestamps into local time;
/// ISO-8601 values are taken as written (an explicit offset is dropped
/// after reading the local wall-clock part).
pub fn parse_ticks<R: Read>(
    source: R,
    columns: &ColumnMap,
    utc_offset_secs: i32,
) -> Result<ParsedTicks, MarketDataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let header = reader.headers()?.clone();
    let find = |name: &str| header.iter().position(|h| h == name);
    let required = |name: &str| find(name).ok_or_else(|| MarketDataError::MissingColumn(name.to_string()));
    let optional = |name: &Option<String>| name.as_deref().and_then(find);

    let idx = Indices {
        timestamp: required(&columns.timestamp)?,
        price: required(&columns.price)?,
        bid: optional(&columns.bid),
        ask: optional(&columns.ask),
        volume: optional(&columns.volume),
        corrected: optional(&columns.corrected),
    };
    let has_quotes = idx.bid.is_some() && idx.ask.is_some();

    let mut out = ParsedTicks {
        has_quotes,
        ..Default::default()
    };
    for (row, result) in reader.records().enumerate() {
        let line = result
            .as_ref()
            .ok()
            .and_then(|r| r.position().map(|p| p.line()))
            .unwrap_or(row as u64 + 2);
        match result
            .map_err(|e| e.to_string())
            .and_then(|rec| parse_row(&rec, &idx, has_quotes, utc_offset_secs))
        {
            Ok(tick) => out.records.push(tick),
            Err(message) => out.errors.push(RowError { line, message }),
        }
    }
    out.records.sort_by(|a, b| a.timestamp.cmp(&b.timestamp));
    Ok(out)
}

fn field<'a>(rec: &'a csv::StringRecord, i: usize, name: &str) -> Result<&'a str, String> {
    rec.get(i).ok_or_else(|| format!("missing field `{name}`"))
}

fn number(rec: &csv::StringRecord, i: usize, name: &str) -> Result<f64, String> {
    let s = field(rec, i, name)?;
    if s.is_empty() {
        return Ok(0.0);
    }
    let v: f64 = s.parse().map_err(|_| format!("bad {name} `{s}`"))?;
    if !v.is_finite() || v < 0.0 {
        return Err(format!("{name} must be finite and non-negative, got `{s}`"));
    }
    Ok(v)
}

fn parse_row(
    rec: &csv::StringRecord,
    idx: &Indices,
    has_quotes: bool,
    utc_offset_secs: i32,
) -> Result<TickRecord, String> {
    let timestamp = parse_timestamp(field(rec, idx.timestamp, "timestamp")?, utc_offset_secs)?;
    let price = number(rec, idx.price, "price")?;
    let (bid, ask) = match (idx.bid, idx.ask) {
        (Some(b), Some(a)) if has_quotes => (Some(number(rec, b, "bid")?), Some(number(rec, a, "ask")?)),
        _ => (None, None),
    };
    let volume = match idx.volume {
        Some(i) => number(rec, i, "volume")?,
        None => 0.0,
    };
    let corrected = match idx.corrected {
        Some(i) => parse_flag(field(rec, i, "corrected")?)?,
        None => false,
    };
    Ok(TickRecord {
        timestamp,
        price,
        bid,
        ask,
        volume,
        corrected,
    })
}

fn parse_flag(s: &str) -> Result<bool, String> {
    match s.to_ascii_lowercase().as_str() {
        "" | "0" | "false" | "f" | "n" | "no" => Ok(false),
        "1" | "true" | "t" | "y" | "yes" => Ok(true),
        _ => Err(format!("bad corrected flag `{s}`")),
    }
}

const ISO_FORMATS: [&str; 2] = ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"];

/// Accepts epoch milliseconds or ISO-8601 (with or without an offset).
pub(crate) fn parse_timestamp(s: &str, utc_offset_secs: i32) -> Result<NaiveDateTime, String> {
    let bad = || format!("unparsable timestamp `{s}`");
    if !s.is_empty() && s.bytes().enumerate().all(|(i, b)| b.is_ascii_digit() || (i == 0 && b == b'-')) {
        let ms: i64 = s.parse().map_err(|_| bad())?;
        let utc = DateTime::from_timestamp_millis(ms).ok_or_else(bad)?.naive_utc();
        return Ok(utc + TimeDelta::seconds(utc_offset_secs as i64));
    }
    let parsed = ISO_FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .or_else(|| DateTime::parse_from_rfc3339(s).ok().map(|d| d.naive_local()))
        .ok_or_else(bad)?;
    Ok(truncate_to_millis(parsed))
}

fn truncate_to_millis(t: NaiveDateTime) -> NaiveDateTime {
    DateTime::from_timestamp_millis(t.and_utc().timestamp_millis())
        .map(|d| d.naive_utc())
        .unwrap_or(t)
}

pub(crate) fn format_timestamp(t: &NaiveDateTime) -> String {
    t.format("%Y-%m-%dT%H:%M:%S%.3f").to_string()
}

/// Write ticks back out under the same column names. Optional columns
/// that are `None` in `columns` are omitted.
pub fn write_ticks_csv<W: Write>(
    sink: W,
    ticks: &[TickRecord],
    columns: &ColumnMap,
    has_quotes: bool,
) -> Result<(), MarketDataError> {
    let mut w = csv::Writer::from_writer(sink);
    let quotes = has_quotes && columns.bid.is_some() && columns.ask.is_some();
    let mut header = vec![columns.timestamp.as_str(), columns.price.as_str()];
    if quotes {
        header.push(columns.bid.as_deref().unwrap_or("bid"));
        header.push(columns.ask.as_deref().unwrap_or("ask"));
    }
    if let Some(v) = columns.volume.as_deref() {
        header.push(v);
    }
    if let Some(c) = columns.corrected.as_deref() {
        header.push(c);
    }
    w.write_record(&header)?;
    for t in ticks {
        let mut row = vec![format_timestamp(&t.timestamp), t.price.to_string()];
        if quotes {
            row.push(t.bid.unwrap_or(0.0).to_string());
            row.push(t.ask.unwrap_or(0.0).to_string());
        }
        if columns.volume.is_some() {
            row.push(t.volume.to_string());
        }
        if columns.corrected.is_some() {
            row.push(if t.corrected { "1" } else { "0" }.to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(src: &str) -> ParsedTicks {
        parse_ticks(src.as_bytes(), &ColumnMap::default(), 0).unwrap()
    }

    #[test]
    fn header_only_gives_empty() {
        let p = parse("timestamp,price,bid,ask,volume,corrected\n");
        assert!(p.records.is_empty());
        assert!(p.errors.is_empty());
        assert!(p.has_quotes);
    }

    #[test]
    fn rows_are_sorted_stably() {
        let p = parse(
            "timestamp,price,bid,ask,volume,corrected\n\
             2010-05-06T09:00:02,3,2.9,3.1,1,0\n\
             2010-05-06T09:00:01,1,0.9,1.1,1,0\n\
             2010-05-06T09:00:02,2,1.9,2.1,1,0\n",
        );
        let prices: Vec<f64> = p.records.iter().map(|t| t.price).collect();
        assert_eq!(prices, vec![1.0, 3.0, 2.0]);
    }

    #[test]
    fn bad_row_is_reported_with_line() {
        let mut src = String::from("timestamp,price,bid,ask,volume,corrected\n");
        for i in 0..100 {
            if i == 41 {
                src.push_str("2010-05-06T09:00:41,abc,1,2,1,0\n");
            } else {
                src.push_str(&format!("2010-05-06T09:{:02}:{:02},100,99.5,100.5,1,0\n", i / 60, i % 60));
            }
        }
        let p = parse(&src);
        assert_eq!(p.records.len(), 99);
        assert_eq!(p.errors.len(), 1);
        assert_eq!(p.errors[0].line, 43);
        assert!(p.errors[0].message.contains("price"));
    }

    #[test]
    fn unparsable_timestamp_is_row_error() {
        let p = parse("timestamp,price\nnot-a-time,5\n2010-01-04 10:00:00,5\n");
        assert_eq!(p.records.len(), 1);
        assert_eq!(p.errors[0].line, 2);
        assert!(p.errors[0].message.contains("timestamp"));
        assert!(!p.has_quotes);
    }

    #[test]
    fn epoch_millis_and_offsets() {
        let t = parse_timestamp("1273153290500", 0).unwrap();
        assert_eq!(format_timestamp(&t), "2010-05-06T13:41:30.500");
        let t = parse_timestamp("1273153290500", -5 * 3600).unwrap();
        assert_eq!(format_timestamp(&t), "2010-05-06T08:41:30.500");
        let t = parse_timestamp("2010-05-06T13:41:30.123456-05:00", 0).unwrap();
        assert_eq!(format_timestamp(&t), "2010-05-06T13:41:30.123");
    }

    #[test]
    fn missing_required_column() {
        let err = parse_ticks("time,price\n".as_bytes(), &ColumnMap::default(), 0).unwrap_err();
        assert!(matches!(err, MarketDataError::MissingColumn(c) if c == "timestamp"));
    }

    #[test]
    fn write_then_read_preserves_records() {
        let p = parse(
            "timestamp,price,bid,ask,volume,corrected\n\
             2010-05-06T09:00:01.250,1.5,1.25,1.75,3,1\n",
        );
        let mut buf = Vec::new();
        write_ticks_csv(&mut buf, &p.records, &ColumnMap::default(), true).unwrap();
        let again = parse(std::str::from_utf8(&buf).unwrap());
        assert_eq!(again.records, p.records);
    }
}
