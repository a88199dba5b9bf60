use fxssa_core::backtest::{
    run_backtest, run_backtest_observed, AccountConfig, BacktestError, BacktestInput, BacktestReport, Conversion,
    ForecastError, Forecaster, History,
};
use fxssa_core::engine::{EngineConfig, SsaForecaster};
use fxssa_core::quotes::{PriceGrid, ReturnPanel};
use fxssa_core::ssa::ModelSpec;
use fxssa_core::strategy::{Direction, StrategyConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PIP: f64 = 1e-4;

fn pairs(m: usize) -> Vec<String> {
    [
        "EURUSD", "GBPUSD", "AUDUSD", "NZDUSD", "USDCHF", "USDJPY", "USDCAD", "EURGBP",
    ][..m]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

/// Random walks with a common factor, returned as (panel, aligned prices).
fn walks(seed: u64, bars: usize, m: usize) -> (ReturnPanel, PriceGrid) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level: Vec<f64> = (0..m).map(|i| 1.0 + 0.1 * i as f64).collect();
    let mut prices = Vec::with_capacity(bars * m);
    for _ in 0..bars {
        let common: f64 = rng.random_range(-1.0..1.0);
        for x in level.iter_mut() {
            *x += 2.0 * PIP * (0.7 * common + 0.3 * rng.random_range(-1.0..1.0));
            prices.push(*x);
        }
    }
    let grid = PriceGrid::from_rows(pairs(m), (0..bars as i64).map(|t| 60 * t).collect(), prices);
    let panel = grid.differences().unwrap();
    let aligned = grid.aligned_to(&panel).unwrap();
    (panel, aligned)
}

fn strategy(m: usize, spread: f64) -> StrategyConfig {
    let mut s = StrategyConfig::new(pairs(m));
    for p in pairs(m) {
        s.spread_per_pair.insert(p, spread);
    }
    s
}

fn run(
    panel: &ReturnPanel,
    prices: &PriceGrid,
    strat: &StrategyConfig,
    forecaster: &mut dyn Forecaster,
) -> Result<BacktestReport, BacktestError> {
    let account = AccountConfig::default();
    let conversions = vec![Conversion::Unit; panel.width()];
    let input = BacktestInput {
        panel,
        prices,
        strategy: strat,
        account: &account,
        conversions: &conversions,
        warmup: 0,
    };
    run_backtest(&input, forecaster)
}

fn ssa(k: usize, l: usize) -> SsaForecaster {
    SsaForecaster::new(EngineConfig::linear(ModelSpec::ssa1(k, l)))
}

/// Always forecasts `+value` on every pair.
struct Constant(f64);

impl Forecaster for Constant {
    fn min_history(&self) -> usize {
        1
    }

    fn forecast(&mut self, history: &History<'_>) -> Result<Vec<f64>, ForecastError> {
        Ok(vec![self.0; history.width()])
    }
}

fn check_accounting(report: &BacktestReport, deposit: f64) {
    for point in &report.equity {
        let closed: f64 = report
            .trades
            .iter()
            .filter(|t| t.close_time <= point.timestamp)
            .map(|t| t.pnl)
            .sum();
        assert!((point.realized - closed).abs() <= 1e-6);
        let identity = deposit + point.realized + point.unrealized;
        assert!((identity - point.equity).abs() <= 1e-6);
    }
    assert!((report.profit - (report.final_equity - deposit)).abs() <= 1e-6);
    assert!((0.0..=100.0).contains(&report.drawdown_pct));
}

#[test]
fn constant_prices_make_no_money() {
    let grid = PriceGrid::from_rows(pairs(2), (0..30).collect(), vec![1.25; 60]);
    let panel = grid.differences().unwrap();
    let prices = grid.aligned_to(&panel).unwrap();
    let report = run(&panel, &prices, &strategy(2, 0.0), &mut ssa(1, 1)).unwrap();
    assert_eq!(report.profit, 0.0);
    assert_eq!(report.drawdown_pct, 0.0);
    assert!(report.trades.iter().all(|t| t.pnl == 0.0));
}

#[test]
fn uptrend_with_oracle_forecaster() {
    let grid = PriceGrid::from_rows(
        pairs(1).into_iter().chain(["GBPUSD".to_string()]).collect(),
        (0..11).collect(),
        (0..11).flat_map(|t| [1.3 + PIP * t as f64, 1.5]).collect(),
    );
    let panel = grid.differences().unwrap();
    let prices = grid.aligned_to(&panel).unwrap();
    let strat = StrategyConfig::new(pairs(1));
    let report = run(&panel, &prices, &strat, &mut Constant(PIP)).unwrap();
    assert_eq!(report.trade_count, 1);
    let trade = &report.trades[0];
    assert_eq!(trade.direction, Direction::Long);
    // Signal at the first bar, fill at the second, force-close at the last.
    assert_eq!((trade.open_time, trade.close_time), (2, 10));
    let expected = 8.0 * PIP * AccountConfig::default().units();
    assert!((report.profit - expected).abs() < 1e-9);
    assert!(report.profit > 0.0);
    assert_eq!(report.drawdown_pct, 0.0);
    check_accounting(&report, 10_000.0);
}

#[test]
fn oversized_warmup_is_rejected() {
    let (panel, prices) = walks(1, 20, 2);
    let account = AccountConfig::default();
    let strat = strategy(2, 0.0);
    let conversions = vec![Conversion::Unit; 2];
    let input = BacktestInput {
        panel: &panel,
        prices: &prices,
        strategy: &strat,
        account: &account,
        conversions: &conversions,
        warmup: 50,
    };
    assert!(matches!(
        run_backtest(&input, &mut ssa(1, 1)),
        Err(BacktestError::InsufficientData { .. })
    ));
}

#[test]
fn accounting_identity_and_drawdown_bounds() {
    for seed in 0..5 {
        let (panel, prices) = walks(seed, 600, 4);
        let report = run(&panel, &prices, &strategy(4, 0.5 * PIP), &mut ssa(2, 1)).unwrap();
        assert!(report.trade_count > 0);
        check_accounting(&report, 10_000.0);
        if let Some(sh) = report.sharpe {
            let mean = report.profit / report.trade_count as f64;
            assert_eq!(sh > 0.0, mean > 0.0);
        }
    }
}

#[test]
fn repeat_runs_are_identical() {
    let (panel, prices) = walks(9, 400, 4);
    let strat = strategy(4, PIP);
    let a = run(&panel, &prices, &strat, &mut ssa(2, 2)).unwrap();
    let b = run(&panel, &prices, &strat, &mut ssa(2, 2)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.profit.to_bits(), b.profit.to_bits());
}

#[test]
fn truncation_never_changes_earlier_trades() {
    let (panel, prices) = walks(3, 500, 4);
    let strat = strategy(4, 0.0);
    let full = run(&panel, &prices, &strat, &mut ssa(2, 1)).unwrap();
    for cut in [120, 260, 499] {
        let short_panel = panel.prefix(cut);
        let short_prices = prices.aligned_to(&short_panel).unwrap();
        let part = run(&short_panel, &short_prices, &strat, &mut ssa(2, 1)).unwrap();
        let last = short_panel.timestamps[cut - 1];
        // Trades closed before the cut are unaffected; the force-close at the
        // cut is the only difference.
        let before =
            |r: &BacktestReport| -> Vec<_> { r.trades.iter().filter(|t| t.close_time < last).cloned().collect() };
        assert_eq!(before(&full), before(&part));
        let opened = |r: &BacktestReport| {
            r.trades
                .iter()
                .filter(|t| t.open_time <= last)
                .map(|t| (t.pair.clone(), t.open_time, t.open_price.to_bits()))
                .collect::<std::collections::BTreeSet<_>>()
        };
        assert_eq!(opened(&full), opened(&part));
        for (a, b) in full.equity.iter().zip(&part.equity).take(part.equity.len() - 1) {
            assert_eq!(a, b);
        }
    }
}

#[test]
fn mirrored_series_has_identical_pnl() {
    let (panel, prices) = walks(21, 500, 4);
    let pivot = 3.0;
    let mirror_prices = PriceGrid::from_rows(
        prices.pair_order.clone(),
        prices.timestamps.clone(),
        prices.prices.iter().map(|p| pivot - p).collect(),
    );
    let mirror_panel = panel.scaled(-1.0);
    let strat = strategy(4, 0.0);
    let mut signals = Vec::new();
    let mut mirrored = Vec::new();
    let account = AccountConfig::default();
    let conversions = vec![Conversion::Unit; 4];
    let input = |panel, prices| BacktestInput {
        panel,
        prices,
        strategy: &strat,
        account: &account,
        conversions: &conversions,
        warmup: 0,
    };
    let a = run_backtest_observed(&input(&panel, &prices), &mut ssa(2, 1), |_, s| {
        signals.push(s.direction)
    })
    .unwrap();
    let b = run_backtest_observed(&input(&mirror_panel, &mirror_prices), &mut ssa(2, 1), |_, s| {
        mirrored.push(s.direction)
    })
    .unwrap();
    assert_eq!(signals.iter().map(|d| d.opposite()).collect::<Vec<_>>(), mirrored);
    assert_eq!(a.trade_count, b.trade_count);
    for (x, y) in a.trades.iter().zip(&b.trades) {
        assert_eq!(x.direction.opposite(), y.direction);
        assert!((x.pnl - y.pnl).abs() <= 1e-9);
    }
    assert!((a.profit - b.profit).abs() <= 1e-9);
}

#[test]
fn margin_call_stops_the_run() {
    let grid = PriceGrid::from_rows(
        pairs(1),
        (0..40).collect(),
        (0..40).map(|t| 1.3 - 200.0 * PIP * t as f64).collect(),
    );
    let panel = grid.differences().unwrap();
    let prices = grid.aligned_to(&panel).unwrap();
    let account = AccountConfig {
        margin_call_level: 0.5,
        ..AccountConfig::default()
    };
    let strat = StrategyConfig::new(pairs(1));
    let input = BacktestInput {
        panel: &panel,
        prices: &prices,
        strategy: &strat,
        account: &account,
        conversions: &[Conversion::Unit],
        warmup: 0,
    };
    match run_backtest(&input, &mut Constant(PIP)) {
        Err(BacktestError::Bankrupt { time, report }) => {
            assert_eq!(report.bankrupt_at, Some(time));
            assert!(report.final_equity <= 5_000.0);
            check_accounting(&report, 10_000.0);
        }
        other => panic!("expected bankruptcy, got {other:?}"),
    }
}
