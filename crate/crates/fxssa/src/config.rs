//! `key = value` run configuration.
//!
//! One key per line, `#` starts a comment, keys are the [`RunConfig`] field
//! names. [`RunConfig::echo`] writes every key back in the same syntax, so an
//! echoed file reproduces the run exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::str::FromStr;

use chrono::NaiveDate;
use fxssa_core::backtest::AccountConfig;
use fxssa_core::eigen::{JacobiConfig, Tolerance};
use fxssa_core::engine::{EngineConfig, NonlinearSpec};
use fxssa_core::nonlinear::{Activation, TrainConfig};
use fxssa_core::quotes::{GapPolicy, PanelConfig, PriceScheme};
use fxssa_core::ssa::{ForecastRule, Mode, ModelSpec};
use fxssa_core::strategy::{ExitRule, StrategyConfig};
use thiserror::Error;

use crate::persist::{activation_name, parse_activation};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Inclusive calendar-day range, or no restriction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DateRange {
    All,
    Days { first: NaiveDate, last: NaiveDate },
}

impl DateRange {
    pub fn study_year() -> Self {
        Self::days((2012, 9, 30), (2013, 9, 30))
    }

    pub fn study_month() -> Self {
        Self::days((2013, 9, 1), (2013, 9, 29))
    }

    fn days(a: (i32, u32, u32), b: (i32, u32, u32)) -> Self {
        DateRange::Days {
            first: NaiveDate::from_ymd_opt(a.0, a.1, a.2).unwrap(),
            last: NaiveDate::from_ymd_opt(b.0, b.1, b.2).unwrap(),
        }
    }

    /// Minutes since the Unix epoch covered by the range.
    pub fn minutes(&self) -> RangeInclusive<i64> {
        let start = |d: NaiveDate| d.and_hms_opt(0, 0, 0).unwrap().and_utc().timestamp() / 60;
        match *self {
            DateRange::All => i64::MIN..=i64::MAX,
            DateRange::Days { first, last } => start(first)..=start(last) + 24 * 60 - 1,
        }
    }
}

impl FromStr for DateRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "all" => return Ok(DateRange::All),
            "study_year" => return Ok(Self::study_year()),
            "study_month" => return Ok(Self::study_month()),
            _ => {}
        }
        let (a, b) = s
            .split_once("..")
            .ok_or("expected `all`, `study_year`, `study_month` or `YYYY-MM-DD..YYYY-MM-DD`")?;
        let parse =
            |d: &str| NaiveDate::parse_from_str(d.trim(), "%Y-%m-%d").map_err(|e| format!("bad date `{d}`: {e}"));
        let (first, last) = (parse(a)?, parse(b)?);
        if first > last {
            return Err("date range ends before it starts".into());
        }
        Ok(DateRange::Days { first, last })
    }
}

impl std::fmt::Display for DateRange {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DateRange::All => f.write_str("all"),
            DateRange::Days { first, last } => write!(f, "{first}..{last}"),
        }
    }
}

/// Nonlinear stage selector: `off`, `poly:<degree>` or `mlp:<hidden layers>,<width>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonlinearChoice {
    Off,
    Poly(usize),
    Mlp { hidden_layers: usize, width: usize },
}

impl FromStr for NonlinearChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("expected `off`, `poly:<degree>` or `mlp:<layers>,<width>`, got `{s}`");
        if s == "off" {
            return Ok(NonlinearChoice::Off);
        }
        if let Some(d) = s.strip_prefix("poly:") {
            return d.parse().map(NonlinearChoice::Poly).map_err(|_| bad());
        }
        if let Some(rest) = s.strip_prefix("mlp:") {
            let (t, w) = rest.split_once(',').ok_or_else(bad)?;
            return Ok(NonlinearChoice::Mlp {
                hidden_layers: t.trim().parse().map_err(|_| bad())?,
                width: w.trim().parse().map_err(|_| bad())?,
            });
        }
        Err(bad())
    }
}

impl std::fmt::Display for NonlinearChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NonlinearChoice::Off => f.write_str("off"),
            NonlinearChoice::Poly(d) => write!(f, "poly:{d}"),
            NonlinearChoice::Mlp { hidden_layers, width } => write!(f, "mlp:{hidden_layers},{width}"),
        }
    }
}

pub const DEFAULT_PAIRS: [&str; 8] = [
    "EURUSD", "GBPUSD", "USDCHF", "USDJPY", "USDCAD", "AUDUSD", "NZDUSD", "EURAUD",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub quotes_path: Option<PathBuf>,
    pub pair_order: Vec<String>,
    pub traded_pairs: Vec<String>,
    pub date_range: DateRange,
    pub timeframe_minutes: i64,
    pub price_scheme: PriceScheme,
    pub gap_policy: GapPolicy,
    pub pre_average_p: usize,

    pub mode: Mode,
    pub k: usize,
    pub l: usize,
    pub n: usize,
    pub i: usize,
    pub forecast_rule: ForecastRule,
    pub jacobi_epsilon: f64,
    pub jacobi_tolerance: Tolerance,
    pub jacobi_max_sweeps: usize,

    pub nonlinear: NonlinearChoice,
    pub activation: Activation,
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2_penalty: f64,
    pub calibration_window: usize,
    pub refit_interval: usize,
    pub seed: u64,

    pub entry_threshold: f64,
    pub exit_rule: ExitRule,
    /// Spread for pairs without an entry in `spread_per_pair`.
    pub spread: f64,
    pub spread_per_pair: BTreeMap<String, f64>,

    pub deposit_currency: String,
    pub initial_deposit: f64,
    pub leverage: f64,
    pub lot_fraction: f64,
    pub margin_call_level: f64,
    pub warmup: usize,

    /// `l` values run by the `sweep` command.
    pub sweep_l: Vec<usize>,
    pub sweep_modes: Vec<Mode>,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let account = AccountConfig::default();
        let precise = JacobiConfig::precise();
        let train = TrainConfig::default();
        Self {
            quotes_path: None,
            pair_order: DEFAULT_PAIRS.iter().map(|s| s.to_string()).collect(),
            traded_pairs: vec!["EURUSD".into()],
            date_range: DateRange::All,
            timeframe_minutes: 1,
            price_scheme: PriceScheme::default(),
            gap_policy: GapPolicy::default(),
            pre_average_p: 5,
            mode: Mode::Ssa1,
            k: 4,
            l: 1,
            n: 3,
            i: 2,
            forecast_rule: ForecastRule::default(),
            jacobi_epsilon: precise.epsilon,
            jacobi_tolerance: precise.tolerance,
            jacobi_max_sweeps: precise.max_sweeps,
            nonlinear: NonlinearChoice::Off,
            activation: Activation::default(),
            epochs: train.epochs,
            learning_rate: train.learning_rate,
            l2_penalty: train.l2_penalty,
            calibration_window: 256,
            refit_interval: 1,
            seed: train.seed,
            entry_threshold: 0.0,
            exit_rule: ExitRule::default(),
            spread: 0.0002,
            spread_per_pair: BTreeMap::new(),
            deposit_currency: account.deposit_currency,
            initial_deposit: account.initial_deposit,
            leverage: account.leverage,
            lot_fraction: account.lot_fraction,
            margin_call_level: account.margin_call_level,
            warmup: 0,
            sweep_l: vec![1, 2, 3, 4],
            sweep_modes: vec![Mode::Ssa1, Mode::Ssa2],
            output_dir: PathBuf::from("fxssa-out"),
        }
    }
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Ssa1 => "ssa1",
        Mode::Ssa2 => "ssa2",
    }
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s.to_ascii_lowercase().as_str() {
        "ssa1" => Ok(Mode::Ssa1),
        "ssa2" => Ok(Mode::Ssa2),
        _ => Err(format!("unknown mode `{s}`")),
    }
}

fn list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|v| !v.is_empty())
}

fn num<T: FromStr>(s: &str) -> Result<T, String> {
    s.parse().map_err(|_| format!("bad number `{s}`"))
}

fn choice<T: Copy>(s: &str, options: &[(&str, T)]) -> Result<T, String> {
    options
        .iter()
        .find(|(name, _)| *name == s)
        .map(|(_, v)| *v)
        .ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            format!("expected one of {}, got `{s}`", names.join(", "))
        })
}

const SCHEMES: [(&str, PriceScheme); 3] = [
    ("ohlc4", PriceScheme::Ohlc4),
    ("hlc3", PriceScheme::Hlc3),
    ("hlcc4", PriceScheme::Hlcc4),
];
const GAPS: [(&str, GapPolicy); 2] = [
    ("drop_row", GapPolicy::DropRow),
    ("carry_forward", GapPolicy::CarryForward),
];
const RULES: [(&str, ForecastRule); 2] = [
    ("projector", ForecastRule::Projector),
    ("coordinate_sum", ForecastRule::CoordinateSum),
];
const TOLERANCES: [(&str, Tolerance); 2] = [("absolute", Tolerance::Absolute), ("relative", Tolerance::Relative)];
const EXITS: [(&str, ExitRule); 2] = [
    ("reverse_on_opposite_signal", ExitRule::ReverseOnOppositeSignal),
    ("flat_on_weak_signal", ExitRule::FlatOnWeakSignal),
];

fn name_of<T: PartialEq>(value: T, options: &[(&'static str, T)]) -> &'static str {
    options.iter().find(|(_, v)| *v == value).unwrap().0
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap().trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                reason: "expected `key = value`".into(),
            })?;
            cfg.set(key.trim(), value.trim(), line)?;
        }
        Ok(cfg)
    }

    fn set(&mut self, key: &str, v: &str, line: usize) -> Result<(), ConfigError> {
        let known: Result<bool, String> = (|| {
            match key {
                "quotes_path" => self.quotes_path = (!v.is_empty()).then(|| PathBuf::from(v)),
                "pair_order" => self.pair_order = list(v).map(str::to_string).collect(),
                "traded_pairs" => self.traded_pairs = list(v).map(str::to_string).collect(),
                "date_range" => self.date_range = v.parse()?,
                "timeframe_minutes" => self.timeframe_minutes = num(v)?,
                "price_scheme" => self.price_scheme = choice(v, &SCHEMES)?,
                "gap_policy" => self.gap_policy = choice(v, &GAPS)?,
                "pre_average_p" => self.pre_average_p = num(v)?,
                "mode" => self.mode = parse_mode(v)?,
                "k" => self.k = num(v)?,
                "l" => self.l = num(v)?,
                "n" => self.n = num(v)?,
                "i" => self.i = num(v)?,
                "forecast_rule" => self.forecast_rule = choice(v, &RULES)?,
                "jacobi_epsilon" => self.jacobi_epsilon = num(v)?,
                "jacobi_tolerance" => self.jacobi_tolerance = choice(v, &TOLERANCES)?,
                "jacobi_max_sweeps" => self.jacobi_max_sweeps = num(v)?,
                "nonlinear" => self.nonlinear = v.parse()?,
                "activation" => self.activation = parse_activation(v).ok_or(format!("unknown activation `{v}`"))?,
                "epochs" => self.epochs = num(v)?,
                "learning_rate" => self.learning_rate = num(v)?,
                "l2_penalty" => self.l2_penalty = num(v)?,
                "calibration_window" => self.calibration_window = num(v)?,
                "refit_interval" => self.refit_interval = num(v)?,
                "seed" => self.seed = num(v)?,
                "entry_threshold" => self.entry_threshold = num(v)?,
                "exit_rule" => self.exit_rule = choice(v, &EXITS)?,
                "spread" => self.spread = num(v)?,
                "spread_per_pair" => {
                    self.spread_per_pair = list(v)
                        .map(|item| {
                            let (p, s) = item
                                .split_once(':')
                                .ok_or(format!("expected `PAIR:spread`, got `{item}`"))?;
                            Ok((p.trim().to_string(), num(s.trim())?))
                        })
                        .collect::<Result<_, String>>()?
                }
                "deposit_currency" => self.deposit_currency = v.to_string(),
                "initial_deposit" => self.initial_deposit = num(v)?,
                "leverage" => self.leverage = num(v)?,
                "lot_fraction" => self.lot_fraction = num(v)?,
                "margin_call_level" => self.margin_call_level = num(v)?,
                "warmup" => self.warmup = num(v)?,
                "sweep_l" => {
                    self.sweep_l = match v.split_once("..") {
                        Some((a, b)) => (num(a.trim())?..=num(b.trim())?).collect(),
                        None => list(v).map(num).collect::<Result<_, _>>()?,
                    }
                }
                "sweep_modes" => self.sweep_modes = list(v).map(parse_mode).collect::<Result<_, _>>()?,
                "output_dir" => self.output_dir = PathBuf::from(v),
                _ => return Ok(false),
            }
            Ok(true)
        })();
        match known {
            Ok(true) => Ok(()),
            Ok(false) => Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            }),
            Err(reason) => Err(ConfigError::Syntax {
                line,
                reason: format!("{key}: {reason}"),
            }),
        }
    }

    /// Every key in parse syntax; `RunConfig::parse(&cfg.echo()) == cfg`.
    pub fn echo(&self) -> String {
        let mut o = String::new();
        let mut kv = |k: &str, v: &dyn std::fmt::Display| writeln!(o, "{k} = {v}").unwrap();
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        kv("quotes_path", &path(&self.quotes_path));
        kv("pair_order", &self.pair_order.join(","));
        kv("traded_pairs", &self.traded_pairs.join(","));
        kv("date_range", &self.date_range);
        kv("timeframe_minutes", &self.timeframe_minutes);
        kv("price_scheme", &name_of(self.price_scheme, &SCHEMES));
        kv("gap_policy", &name_of(self.gap_policy, &GAPS));
        kv("pre_average_p", &self.pre_average_p);
        kv("mode", &mode_name(self.mode));
        kv("k", &self.k);
        kv("l", &self.l);
        kv("n", &self.n);
        kv("i", &self.i);
        kv("forecast_rule", &name_of(self.forecast_rule, &RULES));
        kv("jacobi_epsilon", &self.jacobi_epsilon);
        kv("jacobi_tolerance", &name_of(self.jacobi_tolerance, &TOLERANCES));
        kv("jacobi_max_sweeps", &self.jacobi_max_sweeps);
        kv("nonlinear", &self.nonlinear);
        kv("activation", &activation_name(self.activation));
        kv("epochs", &self.epochs);
        kv("learning_rate", &self.learning_rate);
        kv("l2_penalty", &self.l2_penalty);
        kv("calibration_window", &self.calibration_window);
        kv("refit_interval", &self.refit_interval);
        kv("seed", &self.seed);
        kv("entry_threshold", &self.entry_threshold);
        kv("exit_rule", &name_of(self.exit_rule, &EXITS));
        kv("spread", &self.spread);
        let spreads: Vec<String> = self.spread_per_pair.iter().map(|(p, s)| format!("{p}:{s}")).collect();
        kv("spread_per_pair", &spreads.join(","));
        kv("deposit_currency", &self.deposit_currency);
        kv("initial_deposit", &self.initial_deposit);
        kv("leverage", &self.leverage);
        kv("lot_fraction", &self.lot_fraction);
        kv("margin_call_level", &self.margin_call_level);
        kv("warmup", &self.warmup);
        let ls: Vec<String> = self.sweep_l.iter().map(usize::to_string).collect();
        kv("sweep_l", &ls.join(","));
        let modes: Vec<&str> = self.sweep_modes.iter().map(|m| mode_name(*m)).collect();
        kv("sweep_modes", &modes.join(","));
        kv("output_dir", &self.output_dir.display());
        o
    }

    pub fn panel_config(&self) -> PanelConfig {
        PanelConfig {
            pair_order: self.pair_order.clone(),
            timeframe_minutes: self.timeframe_minutes,
            pre_average_p: self.pre_average_p,
            price_scheme: self.price_scheme,
            gap_policy: self.gap_policy,
        }
    }

    pub fn model_spec(&self, mode: Mode, l: usize) -> ModelSpec {
        let mut spec = match mode {
            Mode::Ssa1 => ModelSpec::ssa1(self.k, l),
            Mode::Ssa2 => ModelSpec::ssa2(self.k, l, self.n, self.i),
        };
        spec.rule = self.forecast_rule;
        spec.jacobi = JacobiConfig {
            epsilon: self.jacobi_epsilon,
            max_sweeps: self.jacobi_max_sweeps,
            tolerance: self.jacobi_tolerance,
        };
        spec
    }

    pub fn engine_config(&self, mode: Mode, l: usize) -> EngineConfig {
        let nonlinear = match self.nonlinear {
            NonlinearChoice::Off => NonlinearSpec::Off,
            NonlinearChoice::Poly(degree) => NonlinearSpec::Poly { degree },
            NonlinearChoice::Mlp { hidden_layers, width } => NonlinearSpec::Mlp {
                hidden_layers,
                width,
                activation: self.activation,
                train: TrainConfig {
                    epochs: self.epochs,
                    learning_rate: self.learning_rate,
                    seed: self.seed,
                    l2_penalty: self.l2_penalty,
                },
            },
        };
        EngineConfig {
            model: self.model_spec(mode, l),
            nonlinear,
            calibration_window: self.calibration_window,
            refit_interval: self.refit_interval,
        }
    }

    pub fn strategy_config(&self) -> StrategyConfig {
        let mut s = StrategyConfig::new(self.traded_pairs.clone());
        s.entry_threshold = self.entry_threshold;
        s.exit_rule = self.exit_rule;
        for pair in &self.pair_order {
            let spread = self.spread_per_pair.get(pair).copied().unwrap_or(self.spread);
            s.spread_per_pair.insert(pair.clone(), spread);
        }
        s
    }

    pub fn account_config(&self) -> AccountConfig {
        AccountConfig {
            deposit_currency: self.deposit_currency.clone(),
            initial_deposit: self.initial_deposit,
            leverage: self.leverage,
            lot_fraction: self.lot_fraction,
            margin_call_level: self.margin_call_level,
        }
    }

    /// Checks every parameter bound of a single run before any data is read.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |e: &dyn std::fmt::Display| ConfigError::Invalid(e.to_string());
        self.panel_config().validate().map_err(|e| invalid(&e))?;
        self.model_spec(self.mode, self.l)
            .validate(self.pair_order.len())
            .map_err(|e| invalid(&e))?;
        self.model_spec(self.mode, self.l)
            .jacobi
            .validate()
            .map_err(|e| invalid(&e))?;
        self.strategy_config()
            .validate(&self.pair_order)
            .map_err(|e| invalid(&e))?;
        self.account_config().validate().map_err(|e| invalid(&e))?;
        if let NonlinearChoice::Poly(0) = self.nonlinear {
            return Err(ConfigError::Invalid("polynomial degree must be at least 1".into()));
        }
        if let NonlinearChoice::Mlp { hidden_layers, width } = self.nonlinear {
            if hidden_layers == 0 || width == 0 {
                return Err(ConfigError::Invalid(
                    "mlp needs at least one hidden layer of nonzero width".into(),
                ));
            }
        }
        if self.nonlinear != NonlinearChoice::Off && self.calibration_window < 2 {
            return Err(ConfigError::Invalid("calibration_window must be at least 2".into()));
        }
        if self.refit_interval == 0 {
            return Err(ConfigError::Invalid("refit_interval must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0) || !(self.l2_penalty >= 0.0) {
            return Err(ConfigError::Invalid(
                "learning_rate must be positive and l2_penalty non-negative".into(),
            ));
        }
        if !(self.spread >= 0.0) {
            return Err(ConfigError::Invalid("spread must be non-negative".into()));
        }
        Ok(())
    }

    /// [`RunConfig::validate`] plus every `(mode, l)` cell of the sweep.
    pub fn validate_sweep(&self) -> Result<(), ConfigError> {
        self.validate()?;
        if self.sweep_modes.is_empty() || self.sweep_l.is_empty() {
            return Err(ConfigError::Invalid("sweep_modes and sweep_l must be non-empty".into()));
        }
        for &mode in &self.sweep_modes {
            for &l in &self.sweep_l {
                self.model_spec(mode, l)
                    .validate(self.pair_order.len())
                    .map_err(|e| ConfigError::Invalid(e.to_string()))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_reference_setup() {
        let c = RunConfig::default();
        assert_eq!(c.pair_order.len(), 8);
        assert_eq!(c.pre_average_p, 5);
        assert_eq!(c.initial_deposit, 10_000.0);
        assert_eq!(c.leverage, 100.0);
        assert_eq!(c.lot_fraction, 0.1);
        assert_eq!(c.sweep_l, vec![1, 2, 3, 4]);
        c.validate().unwrap();
    }

    #[test]
    fn parses_keys_comments_and_lists() {
        let text = "# run\n\
                    mode = ssa2   # lagged\n\
                    l = 3\n\
                    nonlinear = mlp:2,8\n\
                    date_range = study_month\n\
                    spread_per_pair = USDJPY:0.02, EURUSD:0.0001\n\
                    sweep_l = 1..3\n";
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(c.mode, Mode::Ssa2);
        assert_eq!(c.l, 3);
        assert_eq!(
            c.nonlinear,
            NonlinearChoice::Mlp {
                hidden_layers: 2,
                width: 8
            }
        );
        assert_eq!(c.date_range, DateRange::study_month());
        assert_eq!(c.spread_per_pair["USDJPY"], 0.02);
        assert_eq!(c.sweep_l, vec![1, 2, 3]);
        assert_eq!(c.strategy_config().spread("EURUSD"), 0.0001);
        assert_eq!(c.strategy_config().spread("GBPUSD"), 0.0002);
    }

    #[test]
    fn echo_round_trips() {
        let mut c = RunConfig::parse("nonlinear = poly:3\ndate_range = 2013-01-02..2013-02-03\n").unwrap();
        c.quotes_path = Some(PathBuf::from("data/q.csv"));
        c.learning_rate = 0.1 + 0.2;
        c.spread_per_pair.insert("USDJPY".into(), 0.015);
        assert_eq!(RunConfig::parse(&c.echo()).unwrap(), c);
        assert_eq!(
            RunConfig::parse(&RunConfig::default().echo()).unwrap(),
            RunConfig::default()
        );
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(
            RunConfig::parse("k = 2\nbogus = 1\n"),
            Err(ConfigError::UnknownKey {
                line: 2,
                key: "bogus".into()
            })
        );
        assert!(matches!(
            RunConfig::parse("\n\nk 2"),
            Err(ConfigError::Syntax { line: 3, .. })
        ));
        assert!(matches!(
            RunConfig::parse("l = -1"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
    }

    #[test]
    fn zero_l_fails_validation() {
        let c = RunConfig::parse("l = 0").unwrap();
        assert!(matches!(c.validate(), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn sweep_cells_are_checked_only_for_sweeps() {
        let c = RunConfig::parse(
            "pair_order = EURUSD,GBPUSD,AUDUSD
k = 2
l = 1
",
        )
        .unwrap();
        c.validate().unwrap();
        assert!(matches!(c.validate_sweep(), Err(ConfigError::Invalid(_))));
        let mut fits = c.clone();
        fits.sweep_l = vec![1, 2];
        fits.validate_sweep().unwrap();
    }

    #[test]
    fn study_year_covers_whole_days() {
        let r = DateRange::study_year().minutes();
        // 2012-09-30T00:00Z and 2013-09-30T23:59Z.
        assert_eq!(*r.start(), 1_348_963_200 / 60);
        assert_eq!(*r.end(), 1_380_499_200 / 60 + 1439);
    }
}
