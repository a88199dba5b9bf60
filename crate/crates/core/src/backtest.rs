//! Bar-by-bar account simulation and the performance metrics reported for it:
//! profit `P`, per-trade Sharpe ratio `Sh` and maximum drawdown `D%`.
//!
//! At every bar after warm-up the forecaster sees only the panel rows up to
//! and including that bar. Resulting orders fill at the next bar's price
//! shifted by half the spread, positions are marked to market at the price
//! they could be closed at, and everything still open is closed on the last bar.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::math;
use crate::nonlinear::NonlinearError;
use crate::quotes::{PriceGrid, ReturnPanel};
use crate::ssa::SsaError;
use crate::strategy::{generate_signals, next_position, Direction, OrderIntent, Signal, StrategyConfig, StrategyError};

/// Base units in one standard lot.
pub const STANDARD_LOT: f64 = 100_000.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ForecastError {
    #[error(transparent)]
    Ssa(#[from] SsaError),
    #[error(transparent)]
    Nonlinear(#[from] NonlinearError),
    #[error("forecaster produced {got} values for {expected} pairs")]
    WrongLength { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BacktestError {
    #[error("insufficient data: need {needed} rows, have {available}")]
    InsufficientData { needed: usize, available: usize },
    #[error("price table does not match the panel: {0}")]
    Misaligned(&'static str),
    #[error("invalid account config: {0}")]
    InvalidAccount(&'static str),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error("forecast failed at bar {bar}: {source}")]
    Forecast { bar: usize, source: ForecastError },
    #[error("equity fell to the margin-call level at time {time}")]
    Bankrupt { time: i64, report: Box<BacktestReport> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("at least two trades are required")]
    TooFewTrades,
    #[error("trade pnl has zero variance")]
    ZeroVariance,
    #[error("equity curve is empty")]
    EmptyCurve,
}

/// Read-only view of the panel rows observed so far.
#[derive(Debug, Clone, Copy)]
pub struct History<'a> {
    panel: &'a ReturnPanel,
    len: usize,
}

impl<'a> History<'a> {
    /// The first `len` rows of `panel`.
    pub fn new(panel: &'a ReturnPanel, len: usize) -> Self {
        assert!(len <= panel.len());
        Self { panel, len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn width(&self) -> usize {
        self.panel.width()
    }

    pub fn pair_order(&self) -> &'a [String] {
        &self.panel.pair_order
    }

    pub fn timestamps(&self) -> &'a [i64] {
        &self.panel.timestamps[..self.len]
    }

    pub fn row(&self, n: usize) -> &'a [f64] {
        assert!(n < self.len, "row {n} is in the future");
        self.panel.row(n)
    }

    /// The `count` most recent rows, oldest first.
    pub fn last_rows(&self, count: usize) -> Vec<&'a [f64]> {
        assert!(count <= self.len);
        (self.len - count..self.len).map(|n| self.panel.row(n)).collect()
    }
}

/// Produces a per-pair next-step forecast from the observed history.
pub trait Forecaster {
    /// Rows that must be observed before the first forecast.
    fn min_history(&self) -> usize;

    fn forecast(&mut self, history: &History<'_>) -> Result<Vec<f64>, ForecastError>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccountConfig {
    pub deposit_currency: String,
    pub initial_deposit: f64,
    pub leverage: f64,
    /// Fraction of a standard lot traded per position.
    pub lot_fraction: f64,
    /// The run stops once equity ≤ this fraction of the initial deposit.
    pub margin_call_level: f64,
}

impl Default for AccountConfig {
    fn default() -> Self {
        Self {
            deposit_currency: "USD".to_string(),
            initial_deposit: 10_000.0,
            leverage: 100.0,
            lot_fraction: 0.1,
            margin_call_level: 0.0,
        }
    }
}

impl AccountConfig {
    pub fn units(&self) -> f64 {
        self.lot_fraction * STANDARD_LOT
    }

    pub fn validate(&self) -> Result<(), BacktestError> {
        if !(self.initial_deposit > 0.0) {
            return Err(BacktestError::InvalidAccount("initial deposit must be positive"));
        }
        if !(self.leverage > 0.0) {
            return Err(BacktestError::InvalidAccount("leverage must be positive"));
        }
        if !(self.lot_fraction > 0.0) {
            return Err(BacktestError::InvalidAccount("lot fraction must be positive"));
        }
        if !(self.margin_call_level >= 0.0) {
            return Err(BacktestError::InvalidAccount("margin call level must be non-negative"));
        }
        Ok(())
    }
}

/// How a pair's quote-currency pnl is converted into the deposit currency.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conversion {
    /// Quote currency is the deposit currency (or conversion is disabled).
    Unit,
    /// Base currency is the deposit currency: divide by the pair's own price.
    DivideByOwn,
    /// Multiply by the price of the pair at this panel index (`QUOTE/DEPOSIT`).
    MultiplyBy(usize),
    /// Divide by the price of the pair at this panel index (`DEPOSIT/QUOTE`).
    DivideBy(usize),
}

impl Conversion {
    pub fn factor(self, own: usize, prices: &[f64]) -> f64 {
        match self {
            Conversion::Unit => 1.0,
            Conversion::DivideByOwn => 1.0 / prices[own],
            Conversion::MultiplyBy(j) => prices[j],
            Conversion::DivideBy(j) => 1.0 / prices[j],
        }
    }
}

/// Conversion for every pair from six-letter `BASEQUOTE` symbols, plus a note
/// for each pair that had to fall back to 1:1.
pub fn infer_conversions(pairs: &[String], deposit: &str) -> (Vec<Conversion>, Vec<String>) {
    let mut notes = Vec::new();
    let conv = pairs
        .iter()
        .map(|p| {
            if p.len() != 6 || !p.is_ascii() {
                notes.push(format!("{p}: not a six-letter symbol, pnl taken 1:1"));
                return Conversion::Unit;
            }
            let (base, quote) = p.split_at(3);
            if quote == deposit {
                return Conversion::Unit;
            }
            if base == deposit {
                return Conversion::DivideByOwn;
            }
            let direct = format!("{quote}{deposit}");
            let inverse = format!("{deposit}{quote}");
            if let Some(j) = pairs.iter().position(|q| *q == direct) {
                Conversion::MultiplyBy(j)
            } else if let Some(j) = pairs.iter().position(|q| *q == inverse) {
                Conversion::DivideBy(j)
            } else {
                notes.push(format!("{p}: no {quote}/{deposit} rate in panel, pnl taken 1:1"));
                Conversion::Unit
            }
        })
        .collect();
    (conv, notes)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trade {
    pub pair: String,
    pub direction: Direction,
    pub open_time: i64,
    pub close_time: i64,
    /// Fill prices including the half-spread.
    pub open_price: f64,
    pub close_price: f64,
    /// In deposit currency.
    pub pnl: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquityPoint {
    pub timestamp: i64,
    pub equity: f64,
    pub realized: f64,
    pub unrealized: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestReport {
    pub profit: f64,
    /// `None` when fewer than two trades or zero pnl variance.
    pub sharpe: Option<f64>,
    pub drawdown_pct: f64,
    pub trade_count: usize,
    pub final_equity: f64,
    pub trades: Vec<Trade>,
    pub equity: Vec<EquityPoint>,
    /// Opens skipped for lack of free margin.
    pub rejected_orders: usize,
    /// Set when the run stopped at the margin-call level.
    pub bankrupt_at: Option<i64>,
}

/// Everything a run needs besides the forecaster.
#[derive(Debug, Clone, Copy)]
pub struct BacktestInput<'a> {
    pub panel: &'a ReturnPanel,
    /// Prices at the panel timestamps, same pair order.
    pub prices: &'a PriceGrid,
    pub strategy: &'a StrategyConfig,
    pub account: &'a AccountConfig,
    pub conversions: &'a [Conversion],
    /// Index of the first bar at which a forecast is made.
    pub warmup: usize,
}

#[derive(Debug, Clone, Copy)]
struct Position {
    direction: Direction,
    open_time: i64,
    open_price: f64,
}

pub fn run_backtest(
    input: &BacktestInput<'_>,
    forecaster: &mut dyn Forecaster,
) -> Result<BacktestReport, BacktestError> {
    run_backtest_observed(input, forecaster, |_, _| {})
}

/// Like [`run_backtest`], passing every generated signal and its bar time to `on_signal`.
pub fn run_backtest_observed(
    input: &BacktestInput<'_>,
    forecaster: &mut dyn Forecaster,
    mut on_signal: impl FnMut(i64, &Signal),
) -> Result<BacktestReport, BacktestError> {
    let BacktestInput {
        panel,
        prices,
        strategy,
        account,
        conversions,
        warmup,
    } = *input;
    account.validate()?;
    strategy.validate(&panel.pair_order)?;
    if prices.pair_order != panel.pair_order || prices.timestamps != panel.timestamps {
        return Err(BacktestError::Misaligned("timestamps or pair order differ"));
    }
    if conversions.len() != panel.width() {
        return Err(BacktestError::Misaligned("one conversion per pair required"));
    }
    let rows = panel.len();
    let first = warmup.max(forecaster.min_history().saturating_sub(1));
    if first + 1 >= rows {
        return Err(BacktestError::InsufficientData {
            needed: first + 2,
            available: rows,
        });
    }

    let traded: Vec<usize> = strategy
        .traded_pairs
        .iter()
        .map(|p| panel.pair_order.iter().position(|q| q == p).unwrap())
        .collect();
    let units = account.units();
    let mut book = Book {
        units,
        traded: &traded,
        strategy,
        panel,
        conversions,
        positions: vec![None; traded.len()],
        realized: 0.0,
        trades: Vec::new(),
    };
    let mut pending: Vec<&'static [OrderIntent]> = vec![&[]; traded.len()];
    let mut equity = Vec::with_capacity(rows - first);
    let mut rejected = 0usize;
    let floor = account.margin_call_level * account.initial_deposit;

    for t in first..rows {
        let ts = panel.timestamps[t];
        let px = prices.row(t);
        let last_bar = t + 1 == rows;
        for (slot, intents) in pending.iter_mut().enumerate() {
            for intent in intents.iter() {
                match intent {
                    OrderIntent::Close => book.close(slot, ts, px),
                    OrderIntent::OpenLong | OrderIntent::OpenShort if !last_bar => {
                        let direction = if *intent == OrderIntent::OpenLong {
                            Direction::Long
                        } else {
                            Direction::Short
                        };
                        let eq = account.initial_deposit + book.realized + book.unrealized(px);
                        let needed =
                            book.used_margin(px, account.leverage) + book.notional(slot, px) / account.leverage;
                        if needed > eq {
                            rejected += 1;
                        } else {
                            book.open(slot, direction, ts, px);
                        }
                    }
                    _ => {}
                }
            }
            *intents = &[];
        }
        if last_bar {
            for slot in 0..traded.len() {
                book.close(slot, ts, px);
            }
        }
        let unrealized = book.unrealized(px);
        let point = EquityPoint {
            timestamp: ts,
            equity: account.initial_deposit + book.realized + unrealized,
            realized: book.realized,
            unrealized,
        };
        equity.push(point);
        if point.equity <= floor {
            for slot in 0..traded.len() {
                book.close(slot, ts, px);
            }
            // Closing at the marked price leaves equity unchanged.
            if let Some(last) = equity.last_mut() {
                last.realized = book.realized;
                last.unrealized = 0.0;
            }
            let report = finish(account, book.trades, equity, rejected, Some(ts));
            return Err(BacktestError::Bankrupt {
                time: ts,
                report: Box::new(report),
            });
        }
        if last_bar {
            break;
        }

        let history = History::new(panel, t + 1);
        let forecast = forecaster
            .forecast(&history)
            .map_err(|source| BacktestError::Forecast { bar: t, source })?;
        if forecast.len() != panel.width() {
            return Err(BacktestError::Forecast {
                bar: t,
                source: ForecastError::WrongLength {
                    expected: panel.width(),
                    got: forecast.len(),
                },
            });
        }
        let signals = generate_signals(&panel.pair_order, &forecast, strategy)?;
        for (slot, signal) in signals.iter().enumerate() {
            on_signal(ts, signal);
            let current = book.positions[slot].map_or(Direction::Flat, |p| p.direction);
            pending[slot] = next_position(current, signal.direction, strategy.exit_rule);
        }
    }
    Ok(finish(account, book.trades, equity, rejected, None))
}

struct Book<'a> {
    units: f64,
    traded: &'a [usize],
    strategy: &'a StrategyConfig,
    panel: &'a ReturnPanel,
    conversions: &'a [Conversion],
    positions: Vec<Option<Position>>,
    realized: f64,
    trades: Vec<Trade>,
}

impl Book<'_> {
    fn half_spread(&self, slot: usize) -> f64 {
        self.strategy.spread(&self.panel.pair_order[self.traded[slot]]) / 2.0
    }

    fn factor(&self, slot: usize, px: &[f64]) -> f64 {
        let i = self.traded[slot];
        self.conversions[i].factor(i, px)
    }

    /// Price at which a position in `direction` would be closed now.
    fn exit_price(&self, slot: usize, direction: Direction, px: &[f64]) -> f64 {
        px[self.traded[slot]] - direction.sign() * self.half_spread(slot)
    }

    fn open(&mut self, slot: usize, direction: Direction, ts: i64, px: &[f64]) {
        debug_assert!(self.positions[slot].is_none());
        let price = px[self.traded[slot]] + direction.sign() * self.half_spread(slot);
        self.positions[slot] = Some(Position {
            direction,
            open_time: ts,
            open_price: price,
        });
    }

    fn close(&mut self, slot: usize, ts: i64, px: &[f64]) {
        let Some(pos) = self.positions[slot].take() else {
            return;
        };
        let close_price = self.exit_price(slot, pos.direction, px);
        let pnl = pos.direction.sign() * (close_price - pos.open_price) * self.units * self.factor(slot, px);
        self.realized += pnl;
        self.trades.push(Trade {
            pair: self.panel.pair_order[self.traded[slot]].clone(),
            direction: pos.direction,
            open_time: pos.open_time,
            close_time: ts,
            open_price: pos.open_price,
            close_price,
            pnl,
        });
    }

    fn unrealized(&self, px: &[f64]) -> f64 {
        self.positions
            .iter()
            .enumerate()
            .filter_map(|(slot, p)| {
                p.map(|p| {
                    p.direction.sign()
                        * (self.exit_price(slot, p.direction, px) - p.open_price)
                        * self.units
                        * self.factor(slot, px)
                })
            })
            .sum()
    }

    /// Position value in deposit currency.
    fn notional(&self, slot: usize, px: &[f64]) -> f64 {
        (px[self.traded[slot]] * self.units * self.factor(slot, px)).abs()
    }

    fn used_margin(&self, px: &[f64], leverage: f64) -> f64 {
        (0..self.positions.len())
            .filter(|&s| self.positions[s].is_some())
            .map(|s| self.notional(s, px) / leverage)
            .sum()
    }
}

fn finish(
    account: &AccountConfig,
    trades: Vec<Trade>,
    equity: Vec<EquityPoint>,
    rejected_orders: usize,
    bankrupt_at: Option<i64>,
) -> BacktestReport {
    let final_equity = account.initial_deposit + profit(&trades);
    let curve: Vec<f64> = equity.iter().map(|p| p.equity).collect();
    BacktestReport {
        profit: final_equity - account.initial_deposit,
        sharpe: sharpe(&trades).ok(),
        drawdown_pct: max_drawdown(&curve).unwrap_or(0.0),
        trade_count: trades.len(),
        final_equity,
        trades,
        equity,
        rejected_orders,
        bankrupt_at,
    }
}

/// Total realized pnl.
pub fn profit(trades: &[Trade]) -> f64 {
    trades.iter().map(|t| t.pnl).sum()
}

/// Mean per-trade pnl over its sample standard deviation; no risk-free rate,
/// no annualization.
pub fn sharpe(trades: &[Trade]) -> Result<f64, MetricError> {
    let pnl: Vec<f64> = trades.iter().map(|t| t.pnl).collect();
    sharpe_of(&pnl)
}

pub fn sharpe_of(pnl: &[f64]) -> Result<f64, MetricError> {
    if pnl.len() < 2 {
        return Err(MetricError::TooFewTrades);
    }
    let n = pnl.len() as f64;
    let mean = pnl.iter().sum::<f64>() / n;
    let var = pnl.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / (n - 1.0);
    if var == 0.0 {
        return Err(MetricError::ZeroVariance);
    }
    Ok(mean / math::sqrt(var))
}

/// Largest peak-to-trough decline as a percentage of the running peak,
/// capped at 100.
pub fn max_drawdown(equity: &[f64]) -> Result<f64, MetricError> {
    let first = *equity.first().ok_or(MetricError::EmptyCurve)?;
    let mut peak = first;
    let mut worst = 0.0f64;
    for &e in equity {
        peak = peak.max(e);
        if peak > 0.0 {
            worst = worst.max((peak - e) / peak * 100.0);
        }
    }
    Ok(worst.min(100.0))
}
