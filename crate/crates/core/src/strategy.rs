//! Forecast-to-signal conversion and position transitions.
//!
//! Every traded pair's signal is read from a forecast vector produced from
//! the joint panel, so no decision ignores the other pairs.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StrategyError {
    #[error("no forecast for traded pair {0}")]
    MissingForecast(String),
    #[error("invalid strategy config: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Long,
    Short,
    Flat,
}

impl Direction {
    /// `+1` for long, `-1` for short, `0` for flat.
    pub fn sign(self) -> f64 {
        match self {
            Direction::Long => 1.0,
            Direction::Short => -1.0,
            Direction::Flat => 0.0,
        }
    }

    pub fn opposite(self) -> Direction {
        match self {
            Direction::Long => Direction::Short,
            Direction::Short => Direction::Long,
            Direction::Flat => Direction::Flat,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    pub pair: String,
    pub direction: Direction,
    /// Predicted next-step change in price units.
    pub forecast_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExitRule {
    /// A flat signal keeps the position; an opposite one reverses it.
    #[default]
    ReverseOnOppositeSignal,
    /// A flat signal closes the position; an opposite one reverses it.
    FlatOnWeakSignal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyConfig {
    /// Minimum forecast magnitude beyond half the spread, in price units.
    pub entry_threshold: f64,
    pub exit_rule: ExitRule,
    /// Bid-ask spread per pair in price units; absent pairs have zero spread.
    pub spread_per_pair: BTreeMap<String, f64>,
    pub traded_pairs: Vec<String>,
}

impl StrategyConfig {
    pub fn new(traded_pairs: Vec<String>) -> Self {
        Self {
            entry_threshold: 0.0,
            exit_rule: ExitRule::default(),
            spread_per_pair: BTreeMap::new(),
            traded_pairs,
        }
    }

    pub fn spread(&self, pair: &str) -> f64 {
        self.spread_per_pair.get(pair).copied().unwrap_or(0.0)
    }

    pub fn validate(&self, panel_pairs: &[String]) -> Result<(), StrategyError> {
        if self.traded_pairs.is_empty() {
            return Err(StrategyError::InvalidConfig("no traded pairs"));
        }
        if let Some(p) = self.traded_pairs.iter().find(|p| !panel_pairs.contains(p)) {
            return Err(StrategyError::MissingForecast(p.clone()));
        }
        if !(self.entry_threshold >= 0.0) {
            return Err(StrategyError::InvalidConfig("entry threshold must be non-negative"));
        }
        if self.spread_per_pair.values().any(|s| !(*s >= 0.0)) {
            return Err(StrategyError::InvalidConfig("spreads must be non-negative"));
        }
        Ok(())
    }
}

/// One signal per traded pair: long above `threshold + spread/2`, short below
/// its negative, flat in between.
pub fn generate_signals(
    pair_order: &[String],
    forecast: &[f64],
    cfg: &StrategyConfig,
) -> Result<Vec<Signal>, StrategyError> {
    cfg.traded_pairs
        .iter()
        .map(|pair| {
            let value = pair_order
                .iter()
                .position(|p| p == pair)
                .and_then(|i| forecast.get(i).copied())
                .ok_or_else(|| StrategyError::MissingForecast(pair.clone()))?;
            let band = cfg.entry_threshold + cfg.spread(pair) / 2.0;
            let direction = if value > band && value > 0.0 {
                Direction::Long
            } else if value < -band && value < 0.0 {
                Direction::Short
            } else {
                Direction::Flat
            };
            Ok(Signal {
                pair: pair.clone(),
                direction,
                forecast_value: value,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderIntent {
    OpenLong,
    OpenShort,
    Close,
    Hold,
}

/// Order intents, in execution order, that move `current` toward `signal`.
/// `current` is `Flat` when no position is open.
pub fn next_position(current: Direction, signal: Direction, rule: ExitRule) -> &'static [OrderIntent] {
    use OrderIntent::*;
    match (current, signal) {
        (Direction::Flat, Direction::Long) => &[OpenLong],
        (Direction::Flat, Direction::Short) => &[OpenShort],
        (Direction::Flat, Direction::Flat) => &[Hold],
        (Direction::Long, Direction::Long) | (Direction::Short, Direction::Short) => &[Hold],
        (Direction::Long, Direction::Short) => &[Close, OpenShort],
        (Direction::Short, Direction::Long) => &[Close, OpenLong],
        (_, Direction::Flat) => match rule {
            ExitRule::ReverseOnOppositeSignal => &[Hold],
            ExitRule::FlatOnWeakSignal => &[Close],
        },
    }
}
