//! SSA forecaster for the backtester, with optional nonlinear filtration.
//!
//! The linear stage refits the eigenbasis at every bar on the most recent
//! rows and reconstructs the latest return vector. With a nonlinear stage,
//! `φ` is calibrated on pairs (linear output at `s − 1`, observed `y_s`) over a
//! trailing window and the forecast becomes `φ(linear output at t)`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::backtest::{ForecastError, Forecaster, History};
use crate::nonlinear::{
    mlp_train, nonlinear_forecast, polyfit, Activation, MlpNetwork, NonlinearError, NonlinearFilter, TrainConfig,
};
use crate::ssa::{fit_rows, ModelSpec};

#[derive(Debug, Clone, PartialEq)]
pub enum NonlinearSpec {
    Off,
    Poly {
        degree: usize,
    },
    Mlp {
        hidden_layers: usize,
        width: usize,
        activation: Activation,
        train: TrainConfig,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub model: ModelSpec,
    pub nonlinear: NonlinearSpec,
    /// Number of (input, target) pairs used to calibrate `φ`.
    pub calibration_window: usize,
    /// Bars between refits of `φ`; 1 refits at every bar.
    pub refit_interval: usize,
}

impl EngineConfig {
    pub fn linear(model: ModelSpec) -> Self {
        Self {
            model,
            nonlinear: NonlinearSpec::Off,
            calibration_window: 256,
            refit_interval: 1,
        }
    }
}

/// `φ` plus the scale its inputs and outputs were normalized by.
#[derive(Debug, Clone, PartialEq)]
struct Calibrated {
    filter: NonlinearFilter,
    scale: f64,
    fitted_at: usize,
}

#[derive(Debug, Clone)]
pub struct SsaForecaster {
    cfg: EngineConfig,
    linear: BTreeMap<usize, Vec<f64>>,
    calibrated: Option<Calibrated>,
}

impl SsaForecaster {
    pub fn new(cfg: EngineConfig) -> Self {
        Self {
            cfg,
            linear: BTreeMap::new(),
            calibrated: None,
        }
    }

    pub fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    /// The most recently calibrated `φ` and its scale. A network `φ` maps
    /// `x / scale` to `y / scale`; a polynomial one works in raw units.
    pub fn filter(&self) -> Option<(&NonlinearFilter, f64)> {
        self.calibrated.as_ref().map(|c| (&c.filter, c.scale))
    }

    /// Linear reconstruction of the row at index `t` from rows up to `t`.
    fn linear_at(&mut self, history: &History<'_>, t: usize) -> Result<Vec<f64>, ForecastError> {
        if let Some(v) = self.linear.get(&t) {
            return Ok(v.clone());
        }
        let h = self.cfg.model.history();
        let rows: Vec<&[f64]> = (t + 1 - h..=t).map(|s| history.row(s)).collect();
        let model = fit_rows(&rows, &self.cfg.model)?;
        let out = model.forecast_pairs(&rows)?;
        self.linear.insert(t, out.clone());
        Ok(out)
    }

    fn calibrate(&mut self, history: &History<'_>, t: usize) -> Result<(), ForecastError> {
        let w = self.cfg.calibration_window;
        let mut inputs = Vec::with_capacity(w);
        let mut targets = Vec::with_capacity(w);
        for s in t + 1 - w..=t {
            inputs.push(self.linear_at(history, s - 1)?);
            targets.push(history.row(s).to_vec());
        }
        let rms = {
            let (sum, n) = targets
                .iter()
                .flatten()
                .fold((0.0, 0usize), |(s, n), v| (s + v * v, n + 1));
            crate::math::sqrt(sum / n as f64)
        };
        let scale = if rms > 0.0 { rms } else { 1.0 };
        let filter = match &self.cfg.nonlinear {
            NonlinearSpec::Off => return Ok(()),
            NonlinearSpec::Poly { degree } => match polyfit(&inputs, &targets, *degree) {
                Ok(p) => NonlinearFilter::Poly(p),
                // A constant input column (e.g. a frozen quote) leaves φ undefined;
                // keep the previous calibration, or pass the linear forecast through.
                Err(NonlinearError::DegenerateDesign(_)) => return Ok(()),
                Err(e) => return Err(e.into()),
            },
            NonlinearSpec::Mlp {
                hidden_layers,
                width,
                activation,
                train,
            } => {
                let dim = history.width();
                let start = match &self.calibrated {
                    Some(Calibrated {
                        filter: NonlinearFilter::Mlp(net),
                        ..
                    }) => net.clone(),
                    _ => {
                        let mut sizes = Vec::with_capacity(hidden_layers + 2);
                        sizes.push(dim);
                        sizes.extend(core::iter::repeat_n(*width, *hidden_layers));
                        sizes.push(dim);
                        MlpNetwork::seeded(&sizes, *activation, train.seed)?
                    }
                };
                let xs: Vec<Vec<f64>> = inputs.iter().map(|v| v.iter().map(|x| x / scale).collect()).collect();
                let ys: Vec<Vec<f64>> = targets.iter().map(|v| v.iter().map(|x| x / scale).collect()).collect();
                NonlinearFilter::Mlp(mlp_train(&start, &xs, &ys, train)?.network)
            }
        };
        self.calibrated = Some(Calibrated {
            filter,
            scale,
            fitted_at: t,
        });
        Ok(())
    }
}

impl Forecaster for SsaForecaster {
    fn min_history(&self) -> usize {
        match self.cfg.nonlinear {
            NonlinearSpec::Off => self.cfg.model.history(),
            _ => self.cfg.model.history() + self.cfg.calibration_window,
        }
    }

    fn forecast(&mut self, history: &History<'_>) -> Result<Vec<f64>, ForecastError> {
        let needed = self.min_history();
        if history.len() < needed {
            return Err(ForecastError::Ssa(crate::ssa::SsaError::InsufficientHistory {
                needed,
                available: history.len(),
            }));
        }
        let t = history.len() - 1;
        let linear = self.linear_at(history, t)?;
        if self.cfg.nonlinear == NonlinearSpec::Off {
            self.linear.clear();
            return Ok(linear);
        }
        let stale = self
            .calibrated
            .as_ref()
            .is_none_or(|c| t >= c.fitted_at + self.cfg.refit_interval.max(1) || t < c.fitted_at);
        if stale {
            self.calibrate(history, t)?;
        }
        // Cached reconstructions older than the calibration window are never reused.
        let keep_from = t.saturating_sub(self.cfg.calibration_window + 1);
        self.linear = self.linear.split_off(&keep_from);
        let Some(c) = &self.calibrated else {
            return Ok(linear);
        };
        match &c.filter {
            NonlinearFilter::Poly(_) => Ok(nonlinear_forecast(&c.filter, &linear)?),
            NonlinearFilter::Mlp(_) => {
                let x: Vec<f64> = linear.iter().map(|v| v / c.scale).collect();
                let out = nonlinear_forecast(&c.filter, &x)?;
                Ok(out.into_iter().map(|v| v * c.scale).collect())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quotes::ReturnPanel;
    use alloc::string::{String, ToString};

    fn panel(rows: usize) -> ReturnPanel {
        let names: Vec<String> = (0..4).map(|i| i.to_string()).collect();
        let data: Vec<Vec<f64>> = (0..rows)
            .map(|n| (0..4).map(|i| ((n * 7 + i * 3) % 11) as f64 * 1e-4 - 5e-4).collect())
            .collect();
        ReturnPanel::from_rows(names, (0..rows as i64).collect(), &data)
    }

    #[test]
    fn linear_matches_direct_fit() {
        let p = panel(10);
        let spec = ModelSpec::ssa1(2, 1);
        let mut f = SsaForecaster::new(EngineConfig::linear(spec));
        let out = f.forecast(&History::new(&p, 6)).unwrap();
        let model = crate::ssa::fit(&p, 5, &spec).unwrap();
        assert_eq!(out, model.forecast_panel(&p, 5).unwrap());
    }

    #[test]
    fn poly_stage_needs_calibration_history() {
        let p = panel(40);
        let mut cfg = EngineConfig::linear(ModelSpec::ssa1(2, 2));
        cfg.nonlinear = NonlinearSpec::Poly { degree: 2 };
        cfg.calibration_window = 16;
        let mut f = SsaForecaster::new(cfg);
        assert_eq!(f.min_history(), 17);
        assert!(f.forecast(&History::new(&p, 10)).is_err());
        let out = f.forecast(&History::new(&p, 20)).unwrap();
        assert_eq!(out.len(), 4);
        assert!(out.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn mlp_stage_is_deterministic() {
        let p = panel(40);
        let mut cfg = EngineConfig::linear(ModelSpec::ssa1(2, 2));
        cfg.nonlinear = NonlinearSpec::Mlp {
            hidden_layers: 2,
            width: 4,
            activation: Activation::Tanh,
            train: TrainConfig {
                epochs: 20,
                ..TrainConfig::default()
            },
        };
        cfg.calibration_window = 16;
        let run = || {
            let mut f = SsaForecaster::new(cfg.clone());
            (17..30)
                .map(|n| f.forecast(&History::new(&p, n)).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
        assert_eq!(run()[0].len(), 4);
    }
}
