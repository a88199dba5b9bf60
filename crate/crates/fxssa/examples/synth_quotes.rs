//! Writes synthetic correlated quotes for the default eight pairs as CSV.
//!
//! `cargo run --example synth_quotes -- <bars> <rho> <seed> > quotes.csv`

use fxssa::config::DEFAULT_PAIRS;
use fxssa::csv_io::write_quote_csv;
use fxssa::synth::{quote_bars, SynthConfig};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, default: &str| args.get(i).cloned().unwrap_or_else(|| default.to_string());
    let bars: usize = arg(0, "10000").parse().expect("bars must be an integer");
    let rho: f64 = arg(1, "0.7").parse().expect("rho must be a number");
    let seed: u64 = arg(2, "1").parse().expect("seed must be an integer");
    let pairs = DEFAULT_PAIRS.iter().map(|s| s.to_string()).collect();
    let mut cfg = SynthConfig::new(pairs, bars, rho, seed);
    // 2013-09-01T00:00Z in minutes.
    cfg.start_minute = 1_377_993_600 / 60;
    write_quote_csv(std::io::stdout().lock(), &quote_bars(&cfg)).expect("write failed");
}
