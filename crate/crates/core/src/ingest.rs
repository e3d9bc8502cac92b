//! Empirical tick data: delimited-text parsing, session-aligned one-minute
//! returns with previous-tick pricing, and grouping of symbols into
//! realizations.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Cursor, Read};

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{ReturnSeries, SeriesSource};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    /// Seconds since the Unix epoch, UTC.
    pub timestamp: f64,
    pub price: f64,
    pub symbol: String,
}

/// A column selected by header name or zero-based index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Column {
    Index(usize),
    Name(String),
}

impl From<&str> for Column {
    fn from(s: &str) -> Self {
        Column::Name(s.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimestampFormat {
    /// Epoch seconds, falling back to ISO-8601.
    #[default]
    Auto,
    Epoch,
    Iso8601,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TickFormat {
    /// One of `,`, `;` or tab; detected from the header line when unset.
    pub delimiter: Option<char>,
    pub timestamp: Column,
    pub price: Column,
    /// When unset, a column named `symbol` is used if present, otherwise
    /// every row gets `default_symbol`.
    pub symbol: Option<Column>,
    /// `UNKNOWN` when unset.
    pub default_symbol: Option<String>,
    pub timestamp_format: TimestampFormat,
    /// Largest tolerated fraction of rejected rows.
    pub max_error_rate: f64,
}

impl Default for TickFormat {
    fn default() -> Self {
        Self {
            delimiter: None,
            timestamp: "timestamp".into(),
            price: "price".into(),
            symbol: None,
            default_symbol: None,
            timestamp_format: TimestampFormat::Auto,
            max_error_rate: 0.001,
        }
    }
}

impl TickFormat {
    pub fn validate(&self) -> Result<()> {
        if let Some(d) = self.delimiter {
            if !matches!(d, ',' | ';' | '\t') {
                return Err(Error::invalid("delimiter", format!("{d:?} is not one of ',', ';', tab")));
            }
        }
        if !(0.0..=1.0).contains(&self.max_error_rate) {
            return Err(Error::invalid("max_error_rate", format!("must lie in [0, 1], got {}", self.max_error_rate)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowError {
    pub line: u64,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedTicks {
    pub records: Vec<TickRecord>,
    pub rejected: Vec<RowError>,
}

fn detect_delimiter(header: &str) -> u8 {
    (*b",;\t")
        .into_iter()
        .map(|d| (header.bytes().filter(|&b| b == d).count(), d))
        .max_by_key(|&(n, d)| (n, std::cmp::Reverse(d)))
        .filter(|&(n, _)| n > 0)
        .map_or(b',', |(_, d)| d)
}

fn resolve(col: &Column, headers: &csv::StringRecord) -> Result<usize> {
    match col {
        Column::Index(i) if *i < headers.len() => Ok(*i),
        Column::Index(i) => Err(Error::Parse { line: 1, message: format!("column index {i} beyond {} columns", headers.len()) }),
        Column::Name(n) => headers
            .iter()
            .position(|h| h.trim() == n)
            .ok_or_else(|| Error::Parse { line: 1, message: format!("no column named {n:?}") }),
    }
}

/// Parses a timestamp into epoch seconds. ISO-8601 values without an offset
/// are taken as UTC.
pub fn parse_timestamp(s: &str, format: TimestampFormat) -> std::result::Result<f64, String> {
    let s = s.trim();
    let epoch = || s.parse::<f64>().ok().filter(|x| x.is_finite());
    let iso = || -> Option<f64> {
        let dt = DateTime::parse_from_rfc3339(s).map(|d| d.naive_utc()).ok().or_else(|| {
            ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"].iter().find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        })?;
        let utc = dt.and_utc();
        Some(utc.timestamp() as f64 + utc.timestamp_subsec_nanos() as f64 * 1e-9)
    };
    match format {
        TimestampFormat::Epoch => epoch(),
        TimestampFormat::Iso8601 => iso(),
        TimestampFormat::Auto => epoch().or_else(iso),
    }
    .ok_or_else(|| format!("unparseable timestamp {s:?}"))
}

/// Streams delimited text with a header row into tick records.
///
/// Malformed rows and non-positive prices are collected with their line
/// numbers. A decreasing timestamp within a symbol is fatal, as is a
/// rejected fraction above `max_error_rate`.
pub fn parse_ticks<R: Read>(input: R, format: &TickFormat) -> Result<ParsedTicks> {
    format.validate()?;
    let mut reader = std::io::BufReader::new(input);
    let mut header = String::new();
    if reader.read_line(&mut header)? == 0 {
        return Err(Error::Parse { line: 1, message: "empty input".into() });
    }
    let delimiter = format.delimiter.map_or_else(|| detect_delimiter(&header), |c| c as u8);
    let mut csv = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(Cursor::new(header.into_bytes()).chain(reader));
    let headers = csv.headers().map_err(|e| Error::Parse { line: 1, message: e.to_string() })?.clone();
    let ts_col = resolve(&format.timestamp, &headers)?;
    let price_col = resolve(&format.price, &headers)?;
    let sym_col = match &format.symbol {
        Some(c) => Some(resolve(c, &headers)?),
        None => headers.iter().position(|h| h.trim() == "symbol"),
    };
    let default_symbol = format.default_symbol.as_deref().unwrap_or("UNKNOWN");

    let mut out = ParsedTicks::default();
    let mut last: HashMap<String, f64> = HashMap::new();
    let mut total = 0usize;
    let mut record = csv::StringRecord::new();
    loop {
        let line = csv.position().line();
        match csv.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                total += 1;
                out.rejected.push(RowError { line, message: e.to_string() });
                continue;
            }
        }
        let line = record.position().map_or(line, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        total += 1;
        let row = (|| -> std::result::Result<TickRecord, String> {
            let field = |i: usize| record.get(i).ok_or_else(|| format!("missing column {i}"));
            let timestamp = parse_timestamp(field(ts_col)?, format.timestamp_format)?;
            let raw = field(price_col)?;
            let price: f64 = raw.parse().map_err(|_| format!("unparseable price {raw:?}"))?;
            if !(price > 0.0 && price.is_finite()) {
                return Err(format!("non-positive price {raw:?}"));
            }
            let symbol = match sym_col {
                Some(i) => field(i)?.to_string(),
                None => default_symbol.to_string(),
            };
            if symbol.is_empty() {
                return Err("empty symbol".into());
            }
            Ok(TickRecord { timestamp, price, symbol })
        })();
        match row {
            Ok(tick) => {
                if let Some(&prev) = last.get(&tick.symbol) {
                    if tick.timestamp < prev {
                        return Err(Error::Ordering { line, symbol: tick.symbol });
                    }
                }
                last.insert(tick.symbol.clone(), tick.timestamp);
                out.records.push(tick);
            }
            Err(message) => out.rejected.push(RowError { line, message }),
        }
    }
    let rejected = out.rejected.len();
    if rejected > 0 && rejected as f64 > format.max_error_rate * total as f64 {
        return Err(Error::ErrorRate { rejected, total, max_rate: format.max_error_rate });
    }
    Ok(out)
}

/// Groups records by symbol, preserving input order within each symbol.
pub fn split_by_symbol(records: Vec<TickRecord>) -> BTreeMap<String, Vec<TickRecord>> {
    let mut map: BTreeMap<String, Vec<TickRecord>> = BTreeMap::new();
    for r in records {
        map.entry(r.symbol.clone()).or_default().push(r);
    }
    map
}

/// Daily trading session in exchange-local time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionCalendar {
    /// Minute of the local day at which trading opens.
    pub session_open: u32,
    pub session_length: u32,
    /// Local time minus UTC.
    pub utc_offset_minutes: i32,
    /// Restricts sessions to these local dates when set.
    pub trading_days: Option<BTreeSet<NaiveDate>>,
}

impl Default for SessionCalendar {
    /// 09:30 to 16:00 at UTC-5.
    fn default() -> Self {
        Self { session_open: 570, session_length: 390, utc_offset_minutes: -300, trading_days: None }
    }
}

impl SessionCalendar {
    pub fn validate(&self) -> Result<()> {
        if self.session_length < 1 {
            return Err(Error::invalid("session_length", "must be >= 1"));
        }
        if self.session_open + self.session_length > 1440 {
            return Err(Error::invalid(
                "session_length",
                format!("session from minute {} for {} minutes crosses midnight", self.session_open, self.session_length),
            ));
        }
        if self.utc_offset_minutes.abs() > 1440 {
            return Err(Error::invalid("utc_offset_minutes", "must be within one day"));
        }
        Ok(())
    }

    /// Local day number and in-session minute index of a tick, or `None`
    /// when it falls outside every session. Minute `m` collects trades in
    /// `(open + m, open + m + 1]` minutes, with a trade exactly at the open
    /// assigned to minute 0.
    pub fn locate(&self, timestamp: f64) -> Option<(i64, u32)> {
        let local = timestamp + self.utc_offset_minutes as f64 * 60.0;
        let day = (local / 86_400.0).floor();
        let since_open = local - day * 86_400.0 - self.session_open as f64 * 60.0;
        if since_open < 0.0 || since_open > self.session_length as f64 * 60.0 {
            return None;
        }
        let day = day as i64;
        if let Some(days) = &self.trading_days {
            let date = NaiveDate::from_num_days_from_ce_opt((day + 719_163) as i32)?;
            if !days.contains(&date) {
                return None;
            }
        }
        let m = ((since_open / 60.0).ceil() as u32).saturating_sub(1);
        Some((day, m))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinuteReturns {
    pub symbol: String,
    pub series: ReturnSeries,
    pub priced_minutes: usize,
    /// Fraction of returns that are exactly zero.
    pub zero_fraction: f64,
    pub sessions: usize,
    pub ignored_ticks: usize,
}

/// One-minute log returns of a single symbol's ticks.
///
/// Each in-session minute is priced by the last trade at or before its end.
/// Minutes before the first trade of a session are dropped, empty minutes
/// carry the previous price forward (zero return), and no return spans two
/// sessions. `session_starts` marks where each session's returns begin.
pub fn minute_returns(ticks: &[TickRecord], calendar: &SessionCalendar) -> Result<MinuteReturns> {
    calendar.validate()?;
    let symbol = ticks.first().map(|t| t.symbol.clone()).unwrap_or_default();
    if let Some(t) = ticks.iter().find(|t| t.symbol != symbol) {
        return Err(Error::Mismatch(format!("symbols {symbol:?} and {:?} in one series", t.symbol)));
    }
    let len = calendar.session_length as usize;
    let mut sessions: BTreeMap<i64, Vec<Option<f64>>> = BTreeMap::new();
    let mut ignored = 0;
    let mut prev_ts = f64::NEG_INFINITY;
    for t in ticks {
        if t.timestamp < prev_ts {
            return Err(Error::Domain(format!("ticks of {symbol:?} are not sorted by time")));
        }
        prev_ts = t.timestamp;
        match calendar.locate(t.timestamp) {
            Some((day, m)) => sessions.entry(day).or_insert_with(|| vec![None; len])[m as usize] = Some(t.price),
            None => ignored += 1,
        }
    }

    let mut values = Vec::new();
    let mut starts = Vec::new();
    let mut priced = 0;
    for minutes in sessions.values() {
        let Some(first) = minutes.iter().position(Option::is_some) else { continue };
        let mut price = minutes[first].unwrap();
        priced += len - first;
        if first + 1 < len {
            starts.push(values.len());
        }
        for m in &minutes[first + 1..] {
            let next = m.unwrap_or(price);
            values.push((next / price).ln());
            price = next;
        }
    }
    if priced < 2 || values.is_empty() {
        return Err(Error::InsufficientData(format!("symbol {symbol:?} has {priced} priced minutes")));
    }
    let zeros = values.iter().filter(|&&r| r == 0.0).count();
    let zero_fraction = zeros as f64 / values.len() as f64;
    let mut series = ReturnSeries::new(1, values, SeriesSource::Empirical { symbol: symbol.clone() });
    series.session_starts = starts;
    Ok(MinuteReturns { sessions: series.session_starts.len(), symbol, series, priced_minutes: priced, zero_fraction, ignored_ticks: ignored })
}

/// Series treated as independent realizations of one process.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesGroup {
    pub window: u32,
    pub series: Vec<ReturnSeries>,
}

pub fn pool_by_group(series: Vec<ReturnSeries>) -> Result<SeriesGroup> {
    let window = series.first().ok_or_else(|| Error::InsufficientData("empty group".into()))?.window;
    if let Some(s) = series.iter().find(|s| s.window != window) {
        return Err(Error::Mismatch(format!("windows {window} and {} in one group", s.window)));
    }
    Ok(SeriesGroup { window, series })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{abs_return_pdf, power_spectrum, LogBins};
    use proptest::prelude::*;

    fn utc_calendar(open: u32, len: u32) -> SessionCalendar {
        SessionCalendar { session_open: open, session_length: len, utc_offset_minutes: 0, trading_days: None }
    }

    fn tick(ts: f64, price: f64) -> TickRecord {
        TickRecord { timestamp: ts, price, symbol: "X".into() }
    }

    #[test]
    fn three_rows_in_order() {
        let text = "timestamp,price,symbol\n10,1.5,A\n20,1.6,B\n30,1.7,A\n";
        let p = parse_ticks(text.as_bytes(), &TickFormat::default()).unwrap();
        assert_eq!(p.records.len(), 3);
        assert_eq!(p.records[1], TickRecord { timestamp: 20.0, price: 1.6, symbol: "B".into() });
        assert!(p.rejected.is_empty());
    }

    #[test]
    fn zero_price_is_a_row_error() {
        let text = "timestamp,price,symbol\n10,1.5,A\n20,0,A\n30,1.7,A\n";
        let fmt = TickFormat { max_error_rate: 0.5, ..TickFormat::default() };
        let p = parse_ticks(text.as_bytes(), &fmt).unwrap();
        assert_eq!(p.records.len(), 2);
        assert_eq!(p.rejected.len(), 1);
        assert_eq!(p.rejected[0].line, 3);
        // the default threshold makes one bad row in three fatal
        assert!(matches!(
            parse_ticks(text.as_bytes(), &TickFormat::default()),
            Err(Error::ErrorRate { rejected: 1, total: 3, .. })
        ));
    }

    #[test]
    fn out_of_order_names_the_row() {
        let text = "timestamp,price,symbol\n10,1.5,A\n5,1.6,B\n30,1.7,A\n20,1.7,A\n";
        match parse_ticks(text.as_bytes(), &TickFormat::default()) {
            Err(Error::Ordering { line, symbol }) => {
                assert_eq!(line, 5);
                assert_eq!(symbol, "A");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn header_problems_are_fatal() {
        assert!(matches!(parse_ticks("".as_bytes(), &TickFormat::default()), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_ticks("time,price\n1,2\n".as_bytes(), &TickFormat::default()), Err(Error::Parse { .. })));
    }

    #[test]
    fn delimiters_indices_and_iso_timestamps() {
        let text = "when;px\n2024-01-02T14:30:00Z;10\n2024-01-02 14:31:00.5;11\n";
        let fmt = TickFormat {
            timestamp: Column::Index(0),
            price: "px".into(),
            symbol: None,
            default_symbol: Some("S".into()),
            timestamp_format: TimestampFormat::Iso8601,
            ..TickFormat::default()
        };
        let p = parse_ticks(text.as_bytes(), &fmt).unwrap();
        assert_eq!(p.records[0].timestamp, 1_704_205_800.0);
        assert_eq!(p.records[1].timestamp, 1_704_205_860.5);
        assert_eq!(p.records[1].symbol, "S");
        let tabbed = "timestamp\tprice\tsymbol\n1\t2\tA\n";
        assert_eq!(parse_ticks(tabbed.as_bytes(), &TickFormat::default()).unwrap().records.len(), 1);
        assert!(parse_timestamp("yesterday", TimestampFormat::Auto).is_err());
        assert!(parse_timestamp("2024-01-02T14:30:00Z", TimestampFormat::Epoch).is_err());
    }

    #[test]
    fn unit_log_return() {
        let cal = utc_calendar(0, 10);
        let ticks = vec![tick(30.0, 100.0), tick(90.0, 100.0 * std::f64::consts::E)];
        let out = minute_returns(&ticks, &cal).unwrap();
        assert!((out.series.values[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_minutes_carry_the_price() {
        let cal = utc_calendar(0, 4);
        let ticks = vec![tick(30.0, 100.0), tick(100.0, 110.0)];
        let out = minute_returns(&ticks, &cal).unwrap();
        assert_eq!(out.series.values, vec![(1.1f64).ln(), 0.0, 0.0]);
        assert!((out.zero_fraction - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn sessions_do_not_connect() {
        let cal = utc_calendar(60, 3);
        let day = 86_400.0;
        let ticks = vec![
            tick(3600.0 + 10.0, 100.0),
            tick(3600.0 + 170.0, 120.0),
            tick(day + 3600.0 + 100.0, 50.0),
            tick(day + 3600.0 + 150.0, 60.0),
        ];
        let out = minute_returns(&ticks, &cal).unwrap();
        // day one: minutes 0..3; day two starts priced at minute 1
        assert_eq!(out.series.values, vec![0.0, (1.2f64).ln(), (1.2f64).ln()]);
        assert_eq!(out.series.session_starts, vec![0, 2]);
        assert_eq!(out.sessions, 2);
    }

    #[test]
    fn ticks_outside_sessions_are_ignored() {
        let mut cal = utc_calendar(60, 2);
        let ticks = vec![tick(10.0, 1.0), tick(3630.0, 2.0), tick(3690.0, 3.0), tick(4000.0, 9.0)];
        let out = minute_returns(&ticks, &cal).unwrap();
        assert_eq!(out.series.values, vec![(1.5f64).ln()]);
        assert_eq!(out.ignored_ticks, 2);
        cal.trading_days = Some([NaiveDate::from_ymd_opt(1970, 1, 2).unwrap()].into());
        assert!(minute_returns(&ticks, &cal).is_err());
    }

    #[test]
    fn trade_on_a_minute_boundary_prices_the_ending_minute() {
        let cal = utc_calendar(0, 3);
        let ticks = vec![tick(0.0, 1.0), tick(60.0, 2.0), tick(61.0, 4.0)];
        let out = minute_returns(&ticks, &cal).unwrap();
        assert_eq!(out.series.values, vec![(2.0f64).ln(), 0.0]);
        let dup = vec![tick(0.0, 1.0), tick(30.0, 7.0), tick(30.0, 2.0), tick(90.0, 2.0)];
        assert_eq!(minute_returns(&dup, &cal).unwrap().series.values, vec![0.0, 0.0]);
    }

    #[test]
    fn too_few_priced_minutes() {
        let cal = utc_calendar(0, 10);
        assert!(minute_returns(&[tick(30.0, 1.0), tick(40.0, 2.0)], &utc_calendar(0, 1)).is_err());
        assert!(minute_returns(&[], &cal).is_err());
        let mixed = vec![tick(30.0, 1.0), TickRecord { timestamp: 40.0, price: 1.0, symbol: "Y".into() }];
        assert!(matches!(minute_returns(&mixed, &cal), Err(Error::Mismatch(_))));
    }

    #[test]
    fn calendar_validation() {
        assert!(utc_calendar(1400, 100).validate().is_err());
        assert!(utc_calendar(0, 0).validate().is_err());
        assert!(SessionCalendar::default().validate().is_ok());
    }

    fn series(values: Vec<f64>, window: u32) -> ReturnSeries {
        ReturnSeries::new(window, values, SeriesSource::Empirical { symbol: "S".into() })
    }

    #[test]
    fn grouping() {
        let a = series((0..64).map(|i| (i as f64 * 0.37).sin()).collect(), 1);
        let group = pool_by_group(vec![a.clone(); 4]).unwrap();
        let pdf = abs_return_pdf(&group.series, &LogBins::default()).unwrap();
        assert_eq!(pdf.n_realizations, 4);
        let single = abs_return_pdf(std::slice::from_ref(&a), &LogBins::default()).unwrap();
        assert_eq!(pdf.density, single.density);
        assert_eq!(
            power_spectrum(&group.series, 16, true).unwrap().power,
            power_spectrum(std::slice::from_ref(&a), 16, true).unwrap().power
        );
        assert!(matches!(pool_by_group(vec![a, series(vec![1.0; 8], 3)]), Err(Error::Mismatch(_))));
        assert!(pool_by_group(vec![]).is_err());
    }

    /// Writes ticks for a minute price path, one or more per minute at
    /// random offsets, and the expected returns.
    fn synthesize(prices: &[f64], offsets: &[(f64, bool)], cal: &SessionCalendar) -> (String, Vec<f64>) {
        let open = cal.session_open as f64 * 60.0 - cal.utc_offset_minutes as f64 * 60.0;
        let mut text = String::from("timestamp,price,symbol\n");
        for (m, (&p, &(off, extra))) in prices.iter().zip(offsets).enumerate() {
            let t = open + m as f64 * 60.0 + off;
            if extra {
                text.push_str(&format!("{t},{},SYM\n", p * 1.5));
            }
            text.push_str(&format!("{t},{p},SYM\n"));
        }
        let returns = prices.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
        (text, returns)
    }

    proptest! {
        #[test]
        fn tick_round_trip(
            path in proptest::collection::vec((1.0f64..1000.0, 1.0f64..59.0, any::<bool>()), 2..200)
        ) {
            let cal = SessionCalendar { session_open: 570, session_length: 390, utc_offset_minutes: -300, trading_days: None };
            let prices: Vec<f64> = path.iter().map(|p| p.0).collect();
            let offsets: Vec<(f64, bool)> = path.iter().map(|p| (p.1, p.2)).collect();
            let (text, expected) = synthesize(&prices, &offsets, &cal);
            let parsed = parse_ticks(text.as_bytes(), &TickFormat::default()).unwrap();
            let by = split_by_symbol(parsed.records);
            let out = minute_returns(&by["SYM"], &cal).unwrap();
            let n = expected.len();
            prop_assert_eq!(&out.series.values[..n], &expected[..]);
            // minutes after the path's end carry the last price
            prop_assert!(out.series.values[n..].iter().all(|&r| r == 0.0));
            prop_assert_eq!(out.series.values.len(), 389);
        }
    }

    #[test]
    fn dense_synthetic_data_has_no_zero_minutes() {
        let cal = utc_calendar(0, 390);
        let prices: Vec<f64> = (0..390).map(|i| 100.0 + (i as f64 * 0.1).sin() + i as f64 * 1e-3).collect();
        let offsets = vec![(30.0, false); 390];
        let (text, expected) = synthesize(&prices, &offsets, &cal);
        let parsed = parse_ticks(text.as_bytes(), &TickFormat::default()).unwrap();
        let out = minute_returns(&parsed.records, &cal).unwrap();
        assert_eq!(out.series.values, expected);
        assert_eq!(out.zero_fraction, 0.0);
    }
}
