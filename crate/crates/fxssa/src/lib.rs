//! File formats, configuration, synthetic data and parameter sweeps around
//! [`fxssa_core`].
// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod csv_io;
pub mod persist;
pub mod pipeline;
pub mod report;
pub mod synth;

pub use fxssa_core as core;
