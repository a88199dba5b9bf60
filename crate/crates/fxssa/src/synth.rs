//! Synthetic correlated random walks.
//!
//! Each pair's log price moves by `σ (√ρ · z_common + √(1 − ρ) · z_own)` per
//! bar with standard normal `z`, so every two pairs' increments have
//! correlation `ρ`.

use fxssa_core::quotes::{PriceGrid, QuoteBar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub pairs: Vec<String>,
    pub bars: usize,
    /// Pairwise correlation of increments, in `[0, 1]`.
    pub rho: f64,
    /// Per-bar standard deviation of log-price increments.
    pub sigma: f64,
    pub start_prices: Vec<f64>,
    /// Timestamp of the first bar, in minutes.
    pub start_minute: i64,
    pub timeframe_minutes: i64,
    pub seed: u64,
}

/// Typical price levels for the pairs used in the default configuration.
pub fn typical_price(pair: &str) -> f64 {
    match pair {
        "EURUSD" => 1.33,
        "GBPUSD" => 1.56,
        "USDCHF" => 0.93,
        "USDJPY" => 98.0,
        "USDCAD" => 1.03,
        "AUDUSD" => 0.93,
        "NZDUSD" => 0.82,
        "EURAUD" => 1.43,
        _ => 1.0,
    }
}

impl SynthConfig {
    /// About half a pip of movement per minute on EURUSD.
    pub fn new(pairs: Vec<String>, bars: usize, rho: f64, seed: u64) -> Self {
        let start_prices = pairs.iter().map(|p| typical_price(p)).collect();
        Self {
            pairs,
            bars,
            rho,
            sigma: 4e-5,
            start_prices,
            start_minute: 0,
            timeframe_minutes: 1,
            seed,
        }
    }
}

struct Walk {
    rng: ChaCha8Rng,
    log_price: Vec<f64>,
    common: f64,
    own: f64,
    sigma: f64,
}

impl Walk {
    fn new(cfg: &SynthConfig) -> Self {
        assert!((0.0..=1.0).contains(&cfg.rho), "rho must lie in [0, 1]");
        assert_eq!(cfg.start_prices.len(), cfg.pairs.len());
        Self {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            log_price: cfg.start_prices.iter().map(|p| p.ln()).collect(),
            common: cfg.rho.sqrt(),
            own: (1.0 - cfg.rho).sqrt(),
            sigma: cfg.sigma,
        }
    }

    fn step(&mut self) {
        let z: f64 = self.rng.sample(StandardNormal);
        for x in &mut self.log_price {
            let e: f64 = self.rng.sample(StandardNormal);
            *x += self.sigma * (self.common * z + self.own * e);
        }
    }
}

/// Walk levels on a uniform grid, used directly as weighted prices.
pub fn price_grid(cfg: &SynthConfig) -> PriceGrid {
    let mut walk = Walk::new(cfg);
    let mut prices = Vec::with_capacity(cfg.bars * cfg.pairs.len());
    for _ in 0..cfg.bars {
        prices.extend(walk.log_price.iter().map(|x| x.exp()));
        walk.step();
    }
    let timestamps = (0..cfg.bars as i64)
        .map(|t| cfg.start_minute + t * cfg.timeframe_minutes)
        .collect();
    PriceGrid::from_rows(cfg.pairs.clone(), timestamps, prices)
}

/// OHLC bars whose open and close follow the walk, with wicks of random
/// length beyond them.
pub fn quote_bars(cfg: &SynthConfig) -> Vec<QuoteBar> {
    let mut walk = Walk::new(cfg);
    let mut wick_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let mut bars = Vec::with_capacity(cfg.bars * cfg.pairs.len());
    for t in 0..cfg.bars as i64 {
        let open: Vec<f64> = walk.log_price.iter().map(|x| x.exp()).collect();
        walk.step();
        for (i, pair) in cfg.pairs.iter().enumerate() {
            let close = walk.log_price[i].exp();
            let o = open[i];
            let wick = |r: &mut ChaCha8Rng| o * cfg.sigma * r.random_range(0.0..0.5);
            let high = o.max(close) + wick(&mut wick_rng);
            let low = o.min(close) - wick(&mut wick_rng);
            let ts = cfg.start_minute + t * cfg.timeframe_minutes;
            bars.push(QuoteBar::new(pair, ts, o, high, low, close).expect("bar ordering holds by construction"));
        }
    }
    bars
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(rho: f64) -> SynthConfig {
        SynthConfig::new(vec!["EURUSD".into(), "GBPUSD".into(), "USDJPY".into()], 4000, rho, 3)
    }

    #[test]
    fn deterministic_given_seed() {
        assert_eq!(price_grid(&cfg(0.5)), price_grid(&cfg(0.5)));
        assert_eq!(quote_bars(&cfg(0.5)), quote_bars(&cfg(0.5)));
    }

    #[test]
    fn increments_have_requested_correlation() {
        let grid = price_grid(&cfg(0.7));
        let panel = grid.differences().unwrap();
        let log = |i: usize| -> Vec<f64> {
            (1..grid.len())
                .map(|t| (grid.row(t)[i] / grid.row(t - 1)[i]).ln())
                .collect()
        };
        let (a, b) = (log(0), log(2));
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let cov: f64 = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        assert!((cov / (va * vb).sqrt() - 0.7).abs() < 0.05);
        assert_eq!(panel.len(), 3999);
    }

    #[test]
    fn bars_are_valid_and_start_at_typical_levels() {
        let bars = quote_bars(&cfg(0.3));
        assert_eq!(bars.len(), 12_000);
        assert!(bars.iter().all(|b| b.validate().is_ok()));
        assert!((bars[2].open - 98.0).abs() < 1e-12);
    }
}
