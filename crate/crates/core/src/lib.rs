//! Multi-currency singular spectrum analysis (SSA) forecasting and backtesting.
//!
//! The crate is `no_std` with `alloc`. Every stage is a pure transformation:
//!
//! * [`quotes`] turns OHLC bars into an aligned panel of per-pair price changes.
//! * [`eigen`] diagonalizes symmetric matrices with classical Jacobi rotations.
//! * [`ssa`] embeds a panel row into a Hankel information matrix (or its
//!   time-lagged block form), fits the dominant eigenbasis and forecasts.
//! * [`nonlinear`] fits a polynomial or backpropagation network filter on top
//!   of the linear forecast.
//! * [`strategy`] turns forecasts into trade signals and order intents.
//! * [`backtest`] replays a panel bar by bar and reports profit, Sharpe ratio
//!   and maximum drawdown.
//! * [`engine`] wires the forecasting stages into a [`backtest::Forecaster`].
//!
//! File formats, configuration and the command line live in the `fxssa`
//! companion crate.
#![cfg_attr(not(any(feature = "std", test)), no_std)]
// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod backtest;
pub mod eigen;
pub mod engine;
pub mod matrix;
pub mod nonlinear;
pub mod quotes;
pub mod ssa;
pub mod strategy;

mod math;

pub use matrix::Matrix;
