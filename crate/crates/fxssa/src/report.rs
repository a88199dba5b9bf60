//! Table-shaped result reports and the files written for each run.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use fxssa_core::ssa::Mode;

use crate::config::RunConfig;
use crate::csv_io::{write_equity_csv, write_ledger_csv, write_signals_csv, CsvError};
use crate::persist::write_filter;
use crate::pipeline::{mode_label, RunOutcome};

/// One line of the results table.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub mode: String,
    pub l: usize,
    pub profit: f64,
    pub sharpe: Option<f64>,
    pub drawdown_pct: f64,
    pub trade_count: usize,
    pub bankrupt: bool,
}

impl From<&RunOutcome> for SummaryRow {
    fn from(o: &RunOutcome) -> Self {
        Self {
            mode: mode_label(o.mode).to_string(),
            l: o.l,
            profit: o.report.profit,
            sharpe: o.report.sharpe,
            drawdown_pct: o.report.drawdown_pct,
            trade_count: o.report.trade_count,
            bankrupt: o.bankrupt(),
        }
    }
}

/// `l  P,$  Sh  D%` plus trade count, one block per mode with the mode label
/// on its first row.
pub fn format_table(rows: &[SummaryRow]) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:<6}{:>3}{:>12}{:>8}{:>8}{:>8}",
        "", "l", "P,$", "Sh", "D%", "trades"
    )
    .unwrap();
    let mut last_mode: Option<&str> = None;
    for r in rows {
        let label = if last_mode == Some(r.mode.as_str()) {
            ""
        } else {
            r.mode.as_str()
        };
        last_mode = Some(r.mode.as_str());
        let sharpe = r.sharpe.map_or_else(|| "-".to_string(), |s| format!("{s:.2}"));
        write!(
            out,
            "{label:<6}{:>3}{:>12.1}{sharpe:>8}{:>8.2}{:>8}",
            r.l, r.profit, r.drawdown_pct, r.trade_count
        )
        .unwrap();
        if r.bankrupt {
            out.push_str("  margin call");
        }
        out.push('\n');
    }
    out
}

const SUMMARY_HEADER: [&str; 7] = [
    "mode",
    "l",
    "profit",
    "sharpe",
    "drawdown_pct",
    "trade_count",
    "bankrupt",
];

pub fn write_summary_csv<W: Write>(writer: W, rows: &[SummaryRow]) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SUMMARY_HEADER)?;
    for r in rows {
        w.write_record([
            r.mode.clone(),
            r.l.to_string(),
            r.profit.to_string(),
            r.sharpe.map(|s| s.to_string()).unwrap_or_default(),
            r.drawdown_pct.to_string(),
            r.trade_count.to_string(),
            r.bankrupt.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_summary_csv<R: Read>(reader: R) -> Result<Vec<SummaryRow>, CsvError> {
    let mut rdr = csv::Reader::from_reader(reader);
    if rdr.headers()?.iter().ne(SUMMARY_HEADER.iter().copied()) {
        return Err(CsvError::MalformedLine {
            line: 0,
            reason: format!("expected header `{}`", SUMMARY_HEADER.join(",")),
        });
    }
    let mut rows = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let line = idx + 1;
        let bad = |what: &str| CsvError::MalformedLine {
            line,
            reason: format!("bad {what}"),
        };
        let rec = rec?;
        if rec.len() != SUMMARY_HEADER.len() {
            return Err(bad("field count"));
        }
        rows.push(SummaryRow {
            mode: rec[0].to_string(),
            l: rec[1].parse().map_err(|_| bad("l"))?,
            profit: rec[2].parse().map_err(|_| bad("profit"))?,
            sharpe: match &rec[3] {
                "" => None,
                s => Some(s.parse().map_err(|_| bad("sharpe"))?),
            },
            drawdown_pct: rec[4].parse().map_err(|_| bad("drawdown_pct"))?,
            trade_count: rec[5].parse().map_err(|_| bad("trade_count"))?,
            bankrupt: rec[6].parse().map_err(|_| bad("bankrupt"))?,
        });
    }
    Ok(rows)
}

pub const CONFIG_ECHO: &str = "run.cfg";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const REPORT_TXT: &str = "report.txt";

fn create(path: &Path) -> std::io::Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new)
}

fn io_err(e: CsvError) -> std::io::Error {
    match e {
        CsvError::Io(e) => e,
        other => std::io::Error::other(other.to_string()),
    }
}

/// File-name prefix of a run's per-cell outputs, e.g. `ssa1_l2_`.
pub fn cell_prefix(mode: Mode, l: usize) -> String {
    format!("{}_l{l}_", mode_label(mode).to_ascii_lowercase())
}

/// Writes the equity curve, trade ledger, signal log and (when present) the
/// calibrated filter of one run. Returns the paths written.
pub fn write_run_files(dir: &Path, prefix: &str, outcome: &RunOutcome) -> std::io::Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut path = |name: &str| {
        let p = dir.join(format!("{prefix}{name}"));
        written.push(p.clone());
        p
    };
    write_equity_csv(create(&path("equity.csv"))?, &outcome.report.equity).map_err(io_err)?;
    write_ledger_csv(create(&path("ledger.csv"))?, &outcome.report.trades).map_err(io_err)?;
    write_signals_csv(create(&path("signals.csv"))?, &outcome.signals).map_err(io_err)?;
    if let Some((filter, scale)) = &outcome.filter {
        let mut f = create(&path("filter.txt"))?;
        f.write_all(write_filter(filter).as_bytes())?;
        writeln!(create(&path("filter_scale.txt"))?, "{scale}")?;
    }
    Ok(written)
}

/// Writes the config echo, summary CSV and text table for a set of runs,
/// then each run's own files. Output happens on the calling thread only.
pub fn write_outputs(dir: &Path, cfg: &RunConfig, outcomes: &[RunOutcome]) -> std::io::Result<String> {
    fs::create_dir_all(dir)?;
    let mut echo = cfg.clone();
    echo.output_dir = dir.to_path_buf();
    fs::write(dir.join(CONFIG_ECHO), echo.echo())?;
    let rows: Vec<SummaryRow> = outcomes.iter().map(SummaryRow::from).collect();
    write_summary_csv(create(&dir.join(SUMMARY_CSV))?, &rows).map_err(io_err)?;
    let table = format_table(&rows);
    fs::write(dir.join(REPORT_TXT), &table)?;
    for o in outcomes {
        write_run_files(dir, &cell_prefix(o.mode, o.l), o)?;
    }
    Ok(table)
}
