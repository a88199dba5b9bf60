//! OHLC bars, weighted prices and the aligned multi-pair return panel.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::math;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuoteError {
    #[error("invalid bar: {0}")]
    InvalidBar(&'static str),
    #[error("invalid panel config: {0}")]
    InvalidConfig(&'static str),
    #[error("no bars for pair {0}")]
    MissingPair(String),
    #[error("pairs share no common time range")]
    NoOverlap,
    #[error("series too short: need {needed} rows, have {available}")]
    TooShort { needed: usize, available: usize },
    #[error("bad correlation window: {0}")]
    BadWindow(&'static str),
}

/// One OHLC bar of one pair. `timestamp` is in minutes since the epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct QuoteBar {
    pub symbol: String,
    pub timestamp: i64,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
}

impl QuoteBar {
    pub fn new(
        symbol: impl Into<String>,
        timestamp: i64,
        open: f64,
        high: f64,
        low: f64,
        close: f64,
    ) -> Result<Self, QuoteError> {
        let bar = Self {
            symbol: symbol.into(),
            timestamp,
            open,
            high,
            low,
            close,
        };
        bar.validate()?;
        Ok(bar)
    }

    pub fn validate(&self) -> Result<(), QuoteError> {
        let prices = [self.open, self.high, self.low, self.close];
        if prices.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            return Err(QuoteError::InvalidBar("prices must be finite and positive"));
        }
        if self.low > self.open.min(self.close) {
            return Err(QuoteError::InvalidBar("low above open or close"));
        }
        if self.high < self.open.max(self.close) {
            return Err(QuoteError::InvalidBar("high below open or close"));
        }
        Ok(())
    }
}

/// Weights used to collapse a bar into one price.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PriceScheme {
    /// `(O + H + L + C) / 4`
    #[default]
    Ohlc4,
    /// `(H + L + C) / 3`
    Hlc3,
    /// `(H + L + 2C) / 4`, the "weighted close".
    Hlcc4,
}

pub fn weighted_price(bar: &QuoteBar, scheme: PriceScheme) -> f64 {
    match scheme {
        PriceScheme::Ohlc4 => (bar.open + bar.high + bar.low + bar.close) / 4.0,
        PriceScheme::Hlc3 => (bar.high + bar.low + bar.close) / 3.0,
        PriceScheme::Hlcc4 => (bar.high + bar.low + 2.0 * bar.close) / 4.0,
    }
}

/// What to do with a grid time at which some pair has no bar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GapPolicy {
    /// Remove the time from every column.
    #[default]
    DropRow,
    /// Reuse the pair's last known price.
    CarryForward,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanelConfig {
    pub pair_order: Vec<String>,
    pub timeframe_minutes: i64,
    pub pre_average_p: usize,
    pub price_scheme: PriceScheme,
    pub gap_policy: GapPolicy,
}

impl PanelConfig {
    pub fn new(pair_order: Vec<String>) -> Self {
        Self {
            pair_order,
            timeframe_minutes: 1,
            pre_average_p: 1,
            price_scheme: PriceScheme::default(),
            gap_policy: GapPolicy::default(),
        }
    }

    pub fn validate(&self) -> Result<(), QuoteError> {
        if self.pair_order.len() < 2 {
            return Err(QuoteError::InvalidConfig("need at least two pairs"));
        }
        for (i, p) in self.pair_order.iter().enumerate() {
            if self.pair_order[..i].contains(p) {
                return Err(QuoteError::InvalidConfig("duplicate pair identifier"));
            }
        }
        if self.timeframe_minutes < 1 {
            return Err(QuoteError::InvalidConfig("timeframe must be at least one minute"));
        }
        if self.pre_average_p < 1 {
            return Err(QuoteError::InvalidConfig("pre-averaging width must be at least 1"));
        }
        Ok(())
    }
}

/// Weighted prices of every pair on a common set of grid times.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceGrid {
    pub pair_order: Vec<String>,
    pub timestamps: Vec<i64>,
    /// Row-major `timestamps.len() × pair_order.len()`.
    pub prices: Vec<f64>,
}

impl PriceGrid {
    pub fn from_rows(pair_order: Vec<String>, timestamps: Vec<i64>, prices: Vec<f64>) -> Self {
        assert_eq!(prices.len(), timestamps.len() * pair_order.len());
        Self {
            pair_order,
            timestamps,
            prices,
        }
    }

    pub fn width(&self) -> usize {
        self.pair_order.len()
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn row(&self, t: usize) -> &[f64] {
        let m = self.width();
        &self.prices[t * m..(t + 1) * m]
    }

    /// First differences `y_n = x_{n+1} − x_n`, stamped with the later time.
    pub fn differences(&self) -> Result<ReturnPanel, QuoteError> {
        if self.len() < 2 {
            return Err(QuoteError::TooShort {
                needed: 2,
                available: self.len(),
            });
        }
        let m = self.width();
        let mut y = Vec::with_capacity((self.len() - 1) * m);
        for t in 1..self.len() {
            for (a, b) in self.row(t).iter().zip(self.row(t - 1)) {
                y.push(a - b);
            }
        }
        Ok(ReturnPanel {
            pair_order: self.pair_order.clone(),
            timestamps: self.timestamps[1..].to_vec(),
            y,
        })
    }

    /// Price rows matching the timestamps of `panel`, or `None` if any is absent.
    pub fn aligned_to(&self, panel: &ReturnPanel) -> Option<PriceGrid> {
        let mut prices = Vec::with_capacity(panel.len() * self.width());
        let mut cursor = 0;
        for &ts in &panel.timestamps {
            while cursor < self.len() && self.timestamps[cursor] < ts {
                cursor += 1;
            }
            if cursor == self.len() || self.timestamps[cursor] != ts {
                return None;
            }
            prices.extend_from_slice(self.row(cursor));
        }
        Some(PriceGrid::from_rows(
            self.pair_order.clone(),
            panel.timestamps.clone(),
            prices,
        ))
    }
}

/// Aligned matrix of per-pair price changes, one row per time.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel {
    pub pair_order: Vec<String>,
    pub timestamps: Vec<i64>,
    /// Row-major `timestamps.len() × pair_order.len()`.
    pub y: Vec<f64>,
}

impl ReturnPanel {
    pub fn from_rows<R: AsRef<[f64]>>(pair_order: Vec<String>, timestamps: Vec<i64>, rows: &[R]) -> Self {
        assert_eq!(rows.len(), timestamps.len());
        let mut y = Vec::with_capacity(rows.len() * pair_order.len());
        for r in rows {
            assert_eq!(r.as_ref().len(), pair_order.len());
            y.extend_from_slice(r.as_ref());
        }
        Self {
            pair_order,
            timestamps,
            y,
        }
    }

    pub fn width(&self) -> usize {
        self.pair_order.len()
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn row(&self, n: usize) -> &[f64] {
        let m = self.width();
        &self.y[n * m..(n + 1) * m]
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        (0..self.len()).map(|n| self.row(n)[i]).collect()
    }

    pub fn pair_index(&self, symbol: &str) -> Option<usize> {
        self.pair_order.iter().position(|p| p == symbol)
    }

    /// The first `rows` rows.
    pub fn prefix(&self, rows: usize) -> ReturnPanel {
        let rows = rows.min(self.len());
        ReturnPanel {
            pair_order: self.pair_order.clone(),
            timestamps: self.timestamps[..rows].to_vec(),
            y: self.y[..rows * self.width()].to_vec(),
        }
    }

    /// Same panel with every entry multiplied by `k`.
    pub fn scaled(&self, k: f64) -> ReturnPanel {
        ReturnPanel {
            pair_order: self.pair_order.clone(),
            timestamps: self.timestamps.clone(),
            y: self.y.iter().map(|v| v * k).collect(),
        }
    }
}

/// Counters describing what [`build_panel`] skipped or filled.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BuildStats {
    /// Bars whose symbol is not in the pair order.
    pub skipped_unknown: usize,
    /// Grid times removed because some pair had no bar.
    pub dropped_rows: usize,
    /// Cells filled by carrying the previous price forward.
    pub filled_cells: usize,
    /// Bars merged into an already occupied bucket.
    pub merged_bars: usize,
}

/// Buckets bars onto the timeframe grid and aligns all pairs.
///
/// Bars falling into the same bucket are merged into one OHLC bar (first open,
/// last close, extreme high and low) before weighting.
pub fn build_price_grid(bars: &[QuoteBar], cfg: &PanelConfig) -> Result<(PriceGrid, BuildStats), QuoteError> {
    cfg.validate()?;
    let m = cfg.pair_order.len();
    let tf = cfg.timeframe_minutes;
    let mut stats = BuildStats::default();
    let mut per_pair: Vec<BTreeMap<i64, QuoteBar>> = vec![BTreeMap::new(); m];

    for bar in bars {
        let Some(i) = cfg.pair_order.iter().position(|p| *p == bar.symbol) else {
            stats.skipped_unknown += 1;
            continue;
        };
        bar.validate()?;
        let bucket = bar.timestamp.div_euclid(tf) * tf;
        match per_pair[i].get_mut(&bucket) {
            Some(agg) => {
                stats.merged_bars += 1;
                if bar.timestamp < agg.timestamp {
                    agg.open = bar.open;
                    agg.timestamp = bar.timestamp;
                } else {
                    agg.close = bar.close;
                }
                agg.high = agg.high.max(bar.high);
                agg.low = agg.low.min(bar.low);
            }
            None => {
                per_pair[i].insert(bucket, bar.clone());
            }
        }
    }

    for (i, series) in per_pair.iter().enumerate() {
        if series.is_empty() {
            return Err(QuoteError::MissingPair(cfg.pair_order[i].clone()));
        }
    }
    let start = per_pair.iter().map(|s| *s.keys().next().unwrap()).max().unwrap();
    let end = per_pair.iter().map(|s| *s.keys().next_back().unwrap()).min().unwrap();
    if start > end {
        return Err(QuoteError::NoOverlap);
    }

    let price = |b: &QuoteBar| weighted_price(b, cfg.price_scheme);
    let mut timestamps = Vec::new();
    let mut prices = Vec::new();
    match cfg.gap_policy {
        GapPolicy::DropRow => {
            let mut t = start;
            while t <= end {
                let row: Option<Vec<f64>> = per_pair.iter().map(|s| s.get(&t).map(price)).collect();
                match row {
                    Some(row) => {
                        timestamps.push(t);
                        prices.extend(row);
                    }
                    None => {
                        if per_pair.iter().any(|s| s.contains_key(&t)) {
                            stats.dropped_rows += 1;
                        }
                    }
                }
                t += tf;
            }
        }
        GapPolicy::CarryForward => {
            // Last price at or before `start` seeds each column.
            let mut last: Vec<f64> = per_pair
                .iter()
                .map(|s| price(s.range(..=start).next_back().unwrap().1))
                .collect();
            let mut t = start;
            while t <= end {
                for (i, s) in per_pair.iter().enumerate() {
                    match s.get(&t) {
                        Some(b) => last[i] = price(b),
                        None => stats.filled_cells += 1,
                    }
                }
                timestamps.push(t);
                prices.extend_from_slice(&last);
                t += tf;
            }
        }
    }
    if timestamps.is_empty() {
        return Err(QuoteError::NoOverlap);
    }
    Ok((PriceGrid::from_rows(cfg.pair_order.clone(), timestamps, prices), stats))
}

/// Builds the return panel `y[n][i] = x_{n+1,i} − x_{n,i}` on aligned grid
/// times, then applies `cfg.pre_average_p` smoothing.
pub fn build_panel(bars: &[QuoteBar], cfg: &PanelConfig) -> Result<(ReturnPanel, BuildStats), QuoteError> {
    let (grid, stats) = build_price_grid(bars, cfg)?;
    let panel = grid.differences()?;
    Ok((smooth_panel(&panel, cfg.pre_average_p)?, stats))
}

/// Trailing simple moving average of width `p` over each column.
pub fn smooth_panel(panel: &ReturnPanel, p: usize) -> Result<ReturnPanel, QuoteError> {
    if p == 0 {
        return Err(QuoteError::InvalidConfig("smoothing width must be at least 1"));
    }
    if panel.len() < p {
        return Err(QuoteError::TooShort {
            needed: p,
            available: panel.len(),
        });
    }
    if p == 1 {
        return Ok(panel.clone());
    }
    let m = panel.width();
    let rows = panel.len() - p + 1;
    let mut y = Vec::with_capacity(rows * m);
    let inv = 1.0 / p as f64;
    for n in 0..rows {
        for i in 0..m {
            // Summed afresh per window so the result does not depend on history.
            let sum: f64 = (n..n + p).map(|k| panel.row(k)[i]).sum();
            y.push(sum * inv);
        }
    }
    Ok(ReturnPanel {
        pair_order: panel.pair_order.clone(),
        timestamps: panel.timestamps[p - 1..].to_vec(),
        y,
    })
}

/// Trailing-window Pearson correlation of columns `i` and `j`.
///
/// Element `k` covers rows `k .. k + window`. Windows in which either column
/// has zero variance yield `None`.
pub fn rolling_correlation(
    panel: &ReturnPanel,
    i: usize,
    j: usize,
    window: usize,
) -> Result<Vec<Option<f64>>, QuoteError> {
    if i == j {
        return Err(QuoteError::BadWindow("columns must differ"));
    }
    if i >= panel.width() || j >= panel.width() {
        return Err(QuoteError::BadWindow("column index out of range"));
    }
    if window < 2 || window > panel.len() {
        return Err(QuoteError::BadWindow("window must lie in [2, rows]"));
    }
    let a = panel.column(i);
    let b = panel.column(j);
    Ok(a.windows(window)
        .zip(b.windows(window))
        .map(|(wa, wb)| pearson(wa, wb))
        .collect())
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / math::sqrt(saa * sbb)).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn bar(sym: &str, ts: i64, o: f64, h: f64, l: f64, c: f64) -> QuoteBar {
        QuoteBar::new(sym, ts, o, h, l, c).unwrap()
    }

    fn flat(sym: &str, ts: i64, x: f64) -> QuoteBar {
        bar(sym, ts, x, x, x, x)
    }

    fn pairs(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn weighted_price_schemes() {
        let b = bar("EURUSD", 100, 1.30, 1.32, 1.29, 1.31);
        assert!((weighted_price(&b, PriceScheme::Ohlc4) - 1.3050).abs() < 1e-12);
        assert!((weighted_price(&b, PriceScheme::Hlcc4) - 1.3075).abs() < 1e-12);
        assert!((weighted_price(&b, PriceScheme::Hlc3) - 3.92 / 3.0).abs() < 1e-12);
        let c = flat("EURUSD", 0, 2.0);
        for s in [PriceScheme::Ohlc4, PriceScheme::Hlc3, PriceScheme::Hlcc4] {
            assert_eq!(weighted_price(&c, s), 2.0);
        }
    }

    #[test]
    fn bar_invariants() {
        assert!(QuoteBar::new("X", 0, 1.30, 1.28, 1.29, 1.31).is_err());
        assert!(QuoteBar::new("X", 0, 1.30, 1.32, 1.31, 1.31).is_err());
        assert!(QuoteBar::new("X", 0, 0.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn single_column_difference() {
        let bars = [
            flat("A", 0, 1.0),
            flat("A", 1, 1.2),
            flat("A", 2, 1.1),
            flat("B", 0, 1.0),
            flat("B", 1, 1.0),
            flat("B", 2, 1.0),
        ];
        let (panel, _) = build_panel(&bars, &PanelConfig::new(pairs(&["A", "B"]))).unwrap();
        let a = panel.column(0);
        assert!((a[0] - 0.2).abs() < 1e-12 && (a[1] + 0.1).abs() < 1e-12);
        assert_eq!(panel.timestamps, vec![1, 2]);
    }

    #[test]
    fn constant_prices_zero_panel() {
        let bars: Vec<_> = (0..5).flat_map(|t| [flat("A", t, 1.5), flat("B", t, 0.8)]).collect();
        let (panel, _) = build_panel(&bars, &PanelConfig::new(pairs(&["A", "B"]))).unwrap();
        assert_eq!(panel.width(), 2);
        assert!(panel.y.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn drop_row_removes_gap_minute() {
        // Pair B has no bar at minute 3 on a five-minute fixture.
        let mut bars = Vec::new();
        for t in 0..5 {
            bars.push(flat("A", t, 1.0 + t as f64));
            if t != 3 {
                bars.push(flat("B", t, 10.0 + 2.0 * t as f64));
            }
        }
        let cfg = PanelConfig::new(pairs(&["A", "B"]));
        let (grid, stats) = build_price_grid(&bars, &cfg).unwrap();
        assert_eq!(grid.timestamps, vec![0, 1, 2, 4]);
        assert_eq!(stats.dropped_rows, 1);
        let panel = grid.differences().unwrap();
        assert_eq!(panel.timestamps, vec![1, 2, 4]);
        assert_eq!(panel.row(2), &[2.0, 4.0]);
    }

    #[test]
    fn carry_forward_fills_gap() {
        let mut bars = Vec::new();
        for t in 0..5 {
            bars.push(flat("A", t, 1.0 + t as f64));
            if t != 3 {
                bars.push(flat("B", t, 10.0 + 2.0 * t as f64));
            }
        }
        let mut cfg = PanelConfig::new(pairs(&["A", "B"]));
        cfg.gap_policy = GapPolicy::CarryForward;
        let (grid, stats) = build_price_grid(&bars, &cfg).unwrap();
        assert_eq!(grid.timestamps, vec![0, 1, 2, 3, 4]);
        assert_eq!(grid.row(3), &[4.0, 14.0]);
        assert_eq!(stats.filled_cells, 1);
    }

    #[test]
    fn unknown_pairs_are_counted() {
        let bars = [
            flat("A", 0, 1.0),
            flat("B", 0, 1.0),
            flat("Z", 0, 1.0),
            flat("A", 1, 1.0),
            flat("B", 1, 1.0),
        ];
        let (_, stats) = build_panel(&bars, &PanelConfig::new(pairs(&["A", "B"]))).unwrap();
        assert_eq!(stats.skipped_unknown, 1);
    }

    #[test]
    fn no_overlap_and_missing_pair() {
        let bars = [
            flat("A", 0, 1.0),
            flat("A", 1, 1.0),
            flat("B", 5, 1.0),
            flat("B", 6, 1.0),
        ];
        let cfg = PanelConfig::new(pairs(&["A", "B"]));
        assert_eq!(build_panel(&bars, &cfg), Err(QuoteError::NoOverlap));
        let cfg = PanelConfig::new(pairs(&["A", "C"]));
        assert_eq!(build_panel(&bars, &cfg), Err(QuoteError::MissingPair("C".into())));
    }

    #[test]
    fn timeframe_buckets_merge_bars() {
        let bars = [
            bar("A", 0, 1.0, 1.1, 0.9, 1.05),
            bar("A", 1, 1.05, 1.3, 1.0, 1.2),
            bar("A", 2, 1.2, 1.25, 1.1, 1.15),
            bar("A", 3, 1.15, 1.2, 1.1, 1.1),
            flat("B", 0, 2.0),
            flat("B", 2, 2.0),
        ];
        let mut cfg = PanelConfig::new(pairs(&["A", "B"]));
        cfg.timeframe_minutes = 2;
        let (grid, stats) = build_price_grid(&bars, &cfg).unwrap();
        assert_eq!(grid.timestamps, vec![0, 2]);
        assert_eq!(stats.merged_bars, 2);
        // Bucket 0: O 1.0, H 1.3, L 0.9, C 1.2.
        assert!((grid.row(0)[0] - (1.0 + 1.3 + 0.9 + 1.2) / 4.0).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(PanelConfig::new(pairs(&["A"])).validate().is_err());
        assert!(PanelConfig::new(pairs(&["A", "A"])).validate().is_err());
    }

    #[test]
    fn smoothing_examples() {
        let panel = ReturnPanel::from_rows(pairs(&["A"]), vec![1, 2, 3, 4], &[[1.0], [2.0], [3.0], [4.0]]);
        assert_eq!(smooth_panel(&panel, 1).unwrap(), panel);
        let s = smooth_panel(&panel, 2).unwrap();
        assert_eq!(s.column(0), vec![1.5, 2.5, 3.5]);
        assert_eq!(s.timestamps, vec![2, 3, 4]);
        let alt = ReturnPanel::from_rows(pairs(&["A"]), vec![1, 2, 3, 4], &[[1.0], [-1.0], [1.0], [-1.0]]);
        assert!(smooth_panel(&alt, 2).unwrap().y.iter().all(|v| *v == 0.0));
        assert_eq!(
            smooth_panel(&panel, 5),
            Err(QuoteError::TooShort {
                needed: 5,
                available: 4
            })
        );
    }

    #[test]
    fn correlation_extremes() {
        let base = [0.3, -0.1, 0.5, 0.2, -0.4, 0.1];
        let rows: Vec<[f64; 3]> = base.iter().map(|v| [*v, 2.0 * v, -v]).collect();
        let panel = ReturnPanel::from_rows(pairs(&["A", "B", "C"]), (0..6).collect(), &rows);
        for c in rolling_correlation(&panel, 0, 1, 3).unwrap() {
            assert!((c.unwrap() - 1.0).abs() < 1e-12);
        }
        for c in rolling_correlation(&panel, 0, 2, 4).unwrap() {
            assert!((c.unwrap() + 1.0).abs() < 1e-12);
        }
        assert!(rolling_correlation(&panel, 0, 0, 3).is_err());
        assert!(rolling_correlation(&panel, 0, 1, 1).is_err());
        assert!(rolling_correlation(&panel, 0, 1, 7).is_err());
    }

    #[test]
    fn correlation_zero_variance_is_missing() {
        let rows = [[1.0, 0.0], [2.0, 0.0], [3.0, 0.0]];
        let panel = ReturnPanel::from_rows(pairs(&["A", "B"]), vec![0, 1, 2], &rows);
        assert_eq!(rolling_correlation(&panel, 0, 1, 2).unwrap(), vec![None, None]);
    }
}
