//! CSV readers and writers for quotes, panels, equity curves, trade ledgers
//! and signal logs.

use std::io::{Read, Write};

use fxssa_core::backtest::{EquityPoint, Trade};
use fxssa_core::quotes::{QuoteBar, ReturnPanel};
use fxssa_core::strategy::{Direction, Signal};
use thiserror::Error;

pub const QUOTE_HEADER: [&str; 6] = ["symbol", "timestamp", "open", "high", "low", "close"];

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("expected header `{}`", QUOTE_HEADER.join(","))]
    BadHeader,
    #[error("no quotes in input")]
    EmptyInput,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CsvError {
    /// 1-based data line of a malformed record, counting from the first line
    /// after the header.
    pub fn line(&self) -> Option<usize> {
        match self {
            CsvError::MalformedLine { line, .. } => Some(*line),
            _ => None,
        }
    }
}

/// Parses `symbol,timestamp,open,high,low,close` with integer-minute
/// timestamps. Every bar is validated.
pub fn parse_quote_csv<R: Read>(reader: R) -> Result<Vec<QuoteBar>, CsvError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers()?;
    if header.iter().ne(QUOTE_HEADER.iter().copied()) {
        return Err(CsvError::BadHeader);
    }
    let mut bars = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let line = idx + 1;
        let bad = |reason: String| CsvError::MalformedLine { line, reason };
        let record = record.map_err(|e| bad(e.to_string()))?;
        if record.len() != 6 {
            return Err(bad(format!("expected 6 fields, found {}", record.len())));
        }
        let timestamp: i64 = record[1]
            .parse()
            .map_err(|_| bad(format!("bad timestamp `{}`", &record[1])))?;
        let mut ohlc = [0.0; 4];
        for (k, slot) in ohlc.iter_mut().enumerate() {
            let field = &record[k + 2];
            *slot = field
                .parse()
                .map_err(|_| bad(format!("bad {} `{field}`", QUOTE_HEADER[k + 2])))?;
        }
        let bar =
            QuoteBar::new(&record[0], timestamp, ohlc[0], ohlc[1], ohlc[2], ohlc[3]).map_err(|e| bad(e.to_string()))?;
        bars.push(bar);
    }
    if bars.is_empty() {
        return Err(CsvError::EmptyInput);
    }
    Ok(bars)
}

pub fn write_quote_csv<W: Write>(writer: W, bars: &[QuoteBar]) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(QUOTE_HEADER)?;
    for b in bars {
        w.write_record([
            b.symbol.clone(),
            b.timestamp.to_string(),
            b.open.to_string(),
            b.high.to_string(),
            b.low.to_string(),
            b.close.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `timestamp,<pair0>,<pair1>,…` with shortest round-trip float formatting.
pub fn write_panel_csv<W: Write>(writer: W, panel: &ReturnPanel) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["timestamp".to_string()];
    header.extend(panel.pair_order.iter().cloned());
    w.write_record(&header)?;
    for n in 0..panel.len() {
        let mut rec = vec![panel.timestamps[n].to_string()];
        rec.extend(panel.row(n).iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_panel_csv<R: Read>(reader: R) -> Result<ReturnPanel, CsvError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.get(0) != Some("timestamp") || header.len() < 2 {
        return Err(CsvError::MalformedLine {
            line: 0,
            reason: "expected `timestamp,<pairs>` header".into(),
        });
    }
    let pairs: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut timestamps = Vec::new();
    let mut rows = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let line = idx + 1;
        let bad = |reason: String| CsvError::MalformedLine { line, reason };
        let record = record.map_err(|e| bad(e.to_string()))?;
        timestamps.push(record[0].parse().map_err(|_| bad("bad timestamp".into()))?);
        let row: Result<Vec<f64>, _> = record.iter().skip(1).map(str::parse).collect();
        rows.push(row.map_err(|_| bad("bad value".into()))?);
    }
    Ok(ReturnPanel::from_rows(pairs, timestamps, &rows))
}

pub fn write_equity_csv<W: Write>(writer: W, equity: &[EquityPoint]) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["timestamp", "equity"])?;
    for p in equity {
        w.write_record([p.timestamp.to_string(), p.equity.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn direction_label(d: Direction) -> &'static str {
    match d {
        Direction::Long => "long",
        Direction::Short => "short",
        Direction::Flat => "flat",
    }
}

pub fn write_ledger_csv<W: Write>(writer: W, trades: &[Trade]) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "pair",
        "dir",
        "open_time",
        "close_time",
        "open_price",
        "close_price",
        "pnl",
    ])?;
    for t in trades {
        w.write_record([
            t.pair.clone(),
            direction_label(t.direction).to_string(),
            t.open_time.to_string(),
            t.close_time.to_string(),
            t.open_price.to_string(),
            t.close_price.to_string(),
            t.pnl.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_signals_csv<W: Write>(writer: W, signals: &[(i64, Signal)]) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["timestamp", "pair", "direction", "forecast_value"])?;
    for (ts, s) in signals {
        w.write_record([
            ts.to_string(),
            s.pair.clone(),
            direction_label(s.direction).to_string(),
            s.forecast_value.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
