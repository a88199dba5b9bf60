//! Quotes to panel to backtest, for one configuration or a sweep over it.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use fxssa_core::backtest::{
    infer_conversions, run_backtest_observed, BacktestError, BacktestInput, BacktestReport, ForecastError, Forecaster,
    History,
};
use fxssa_core::engine::SsaForecaster;
use fxssa_core::nonlinear::NonlinearFilter;
use fxssa_core::quotes::{build_price_grid, smooth_panel, BuildStats, PriceGrid, QuoteBar, QuoteError, ReturnPanel};
use fxssa_core::ssa::{fit, Mode, SsaError};
use fxssa_core::strategy::{generate_signals, Signal, StrategyError};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::csv_io::{parse_quote_csv, CsvError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: CsvError },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("no quotes path configured")]
    NoQuotes,
    #[error(transparent)]
    Quotes(#[from] QuoteError),
    #[error(transparent)]
    Ssa(#[from] SsaError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error("forecast failed: {0}")]
    Forecast(#[from] ForecastError),
    #[error("{mode} l={l}: {source}")]
    Backtest {
        mode: &'static str,
        l: usize,
        source: BacktestError,
    },
}

impl PipelineError {
    /// Problems with the invocation or its files rather than with the data.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            PipelineError::Io { .. } | PipelineError::Config(_) | PipelineError::NoQuotes
        )
    }
}

pub fn mode_label(mode: Mode) -> &'static str {
    match mode {
        Mode::Ssa1 => "SSA1",
        Mode::Ssa2 => "SSA2",
    }
}

/// A return panel and the prices orders fill at, row for row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub panel: ReturnPanel,
    pub prices: PriceGrid,
    pub stats: BuildStats,
}

pub fn read_quotes(path: &Path) -> Result<Vec<QuoteBar>, PipelineError> {
    let file = File::open(path).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_quote_csv(BufReader::new(file)).map_err(|source| match source {
        CsvError::Io(source) => PipelineError::Io {
            path: path.to_path_buf(),
            source,
        },
        source => PipelineError::Csv {
            path: path.to_path_buf(),
            source,
        },
    })
}

/// Reads `cfg.quotes_path` and keeps bars inside `cfg.date_range`.
pub fn load_bars(cfg: &RunConfig) -> Result<Vec<QuoteBar>, PipelineError> {
    let path = cfg.quotes_path.as_ref().ok_or(PipelineError::NoQuotes)?;
    let range = cfg.date_range.minutes();
    let mut bars = read_quotes(path)?;
    bars.retain(|b| range.contains(&b.timestamp));
    Ok(bars)
}

/// Smooths the differences of `grid` and aligns prices to the smoothed rows.
pub fn dataset_from_grid(grid: &PriceGrid, pre_average_p: usize, stats: BuildStats) -> Result<Dataset, QuoteError> {
    let panel = smooth_panel(&grid.differences()?, pre_average_p)?;
    let prices = grid
        .aligned_to(&panel)
        .expect("smoothed panel times are a subset of grid times");
    Ok(Dataset { panel, prices, stats })
}

pub fn dataset_from_bars(bars: &[QuoteBar], cfg: &RunConfig) -> Result<Dataset, QuoteError> {
    let (grid, stats) = build_price_grid(bars, &cfg.panel_config())?;
    dataset_from_grid(&grid, cfg.pre_average_p, stats)
}

/// One backtest run and what it produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub mode: Mode,
    pub l: usize,
    pub report: BacktestReport,
    pub signals: Vec<(i64, Signal)>,
    /// Last calibrated nonlinear filter and its scale.
    pub filter: Option<(NonlinearFilter, f64)>,
    /// Pnl conversions that fell back to 1:1.
    pub notes: Vec<String>,
}

impl RunOutcome {
    pub fn bankrupt(&self) -> bool {
        self.report.bankrupt_at.is_some()
    }
}

/// Runs one backtest. A margin call is not an error: the partial report is
/// returned with `bankrupt_at` set.
pub fn run_one(data: &Dataset, cfg: &RunConfig, mode: Mode, l: usize) -> Result<RunOutcome, PipelineError> {
    let strategy = cfg.strategy_config();
    let account = cfg.account_config();
    let (conversions, notes) = infer_conversions(&data.panel.pair_order, &account.deposit_currency);
    let input = BacktestInput {
        panel: &data.panel,
        prices: &data.prices,
        strategy: &strategy,
        account: &account,
        conversions: &conversions,
        warmup: cfg.warmup,
    };
    let mut forecaster = SsaForecaster::new(cfg.engine_config(mode, l));
    let mut signals = Vec::new();
    let result = run_backtest_observed(&input, &mut forecaster, |ts, s| signals.push((ts, s.clone())));
    let report = match result {
        Ok(r) => r,
        Err(BacktestError::Bankrupt { report, .. }) => *report,
        Err(source) => {
            return Err(PipelineError::Backtest {
                mode: mode_label(mode),
                l,
                source,
            })
        }
    };
    Ok(RunOutcome {
        mode,
        l,
        report,
        signals,
        filter: forecaster.filter().map(|(f, s)| (f.clone(), s)),
        notes,
    })
}

/// Every `(mode, l)` cell of `cfg.sweep_modes × cfg.sweep_l`, run in
/// parallel and returned in row-major order.
pub fn sweep(data: &Dataset, cfg: &RunConfig) -> Result<Vec<RunOutcome>, PipelineError> {
    let cells: Vec<(Mode, usize)> = cfg
        .sweep_modes
        .iter()
        .flat_map(|&m| cfg.sweep_l.iter().map(move |&l| (m, l)))
        .collect();
    cells.par_iter().map(|&(mode, l)| run_one(data, cfg, mode, l)).collect()
}

/// Forecast for the bar after the last panel row.
#[derive(Debug, Clone, PartialEq)]
pub struct LatestForecast {
    pub timestamp: i64,
    pub values: Vec<f64>,
    pub signals: Vec<Signal>,
    /// Diagnostic listing of the linear model fitted on the latest rows.
    pub model_dump: String,
}

pub fn forecast_latest(data: &Dataset, cfg: &RunConfig) -> Result<LatestForecast, PipelineError> {
    let engine = cfg.engine_config(cfg.mode, cfg.l);
    let panel = &data.panel;
    let history = engine.model.history();
    if panel.len() < history {
        return Err(SsaError::InsufficientHistory {
            needed: history,
            available: panel.len(),
        }
        .into());
    }
    let model = fit(panel, panel.len() - history, &engine.model)?;
    let values = SsaForecaster::new(engine).forecast(&History::new(panel, panel.len()))?;
    let signals = generate_signals(&panel.pair_order, &values, &cfg.strategy_config())?;
    Ok(LatestForecast {
        timestamp: *panel.timestamps.last().unwrap(),
        values,
        signals,
        model_dump: model.dump().to_string(),
    })
}
