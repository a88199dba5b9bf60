use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fxssa::config::RunConfig;
use fxssa::csv_io::{direction_label, write_panel_csv};
use fxssa::pipeline::{self, Dataset, PipelineError};
use fxssa::report::{self, format_table, read_summary_csv, CONFIG_ECHO, SUMMARY_CSV};

/// Multi-pair SSA forecasting and backtesting.
#[derive(Parser)]
#[command(name = "fxssa", version)]
struct Cli {
    /// Run configuration (`key = value` lines); defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output_dir` from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the fitted model and conversion notes to stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse quotes, build the return panel and print a summary.
    Ingest,
    /// Forecast the next bar from the latest history.
    Forecast,
    /// Backtest the configured mode and l.
    Backtest,
    /// Backtest every (mode, l) in `sweep_modes` × `sweep_l`.
    Sweep,
    /// Print the results table saved by `backtest` or `sweep`.
    Report,
}

enum Failure {
    Usage(String),
    Pipeline(String),
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        if e.is_usage() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Pipeline(e.to_string())
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

fn load_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
            RunConfig::parse(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    let checked = match cli.command {
        Command::Ingest => cfg.panel_config().validate().map_err(|e| e.to_string()),
        Command::Report => Ok(()),
        Command::Sweep => cfg.validate_sweep().map_err(|e| e.to_string()),
        Command::Forecast | Command::Backtest => cfg.validate().map_err(|e| e.to_string()),
    };
    checked.map_err(Failure::Usage)?;
    Ok(cfg)
}

fn dataset(cfg: &RunConfig) -> Result<Dataset, Failure> {
    let bars = pipeline::load_bars(cfg)?;
    Ok(pipeline::dataset_from_bars(&bars, cfg).map_err(PipelineError::from)?)
}

fn prepare_out(cfg: &RunConfig) -> Result<&Path, Failure> {
    let dir = cfg.output_dir.as_path();
    fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    let echo = dir.join(CONFIG_ECHO);
    fs::write(&echo, cfg.echo()).map_err(|e| io_failure(&echo, e))?;
    Ok(dir)
}

fn ingest(cfg: &RunConfig) -> Result<(), Failure> {
    let data = dataset(cfg)?;
    let dir = prepare_out(cfg)?;
    let panel_path = dir.join("panel.csv");
    let file = fs::File::create(&panel_path).map_err(|e| io_failure(&panel_path, e))?;
    write_panel_csv(std::io::BufWriter::new(file), &data.panel)
        .map_err(|e| Failure::Usage(format!("{}: {e}", panel_path.display())))?;
    let p = &data.panel;
    println!("pairs (M = {}): {}", p.width(), p.pair_order.join(","));
    println!("rows: {}", p.len());
    if let (Some(first), Some(last)) = (p.timestamps.first(), p.timestamps.last()) {
        println!("time range: {first}..{last}");
    }
    let s = &data.stats;
    println!("skipped bars (unknown pair): {}", s.skipped_unknown);
    println!("dropped rows: {}", s.dropped_rows);
    println!("filled cells: {}", s.filled_cells);
    println!("merged bars: {}", s.merged_bars);
    println!("panel written to {}", panel_path.display());
    Ok(())
}

fn forecast(cfg: &RunConfig, verbose: bool) -> Result<(), Failure> {
    let data = dataset(cfg)?;
    let f = pipeline::forecast_latest(&data, cfg)?;
    println!("forecast after t = {}", f.timestamp);
    for (pair, v) in data.panel.pair_order.iter().zip(&f.values) {
        println!("{pair:<8}{v:>+16.8e}");
    }
    for s in &f.signals {
        println!("signal {} {}", s.pair, direction_label(s.direction));
    }
    if verbose {
        eprint!("{}", f.model_dump);
    }
    Ok(())
}

fn backtest(cfg: &RunConfig, all: bool, verbose: bool) -> Result<(), Failure> {
    let data = dataset(cfg)?;
    let outcomes = if all {
        pipeline::sweep(&data, cfg)?
    } else {
        vec![pipeline::run_one(&data, cfg, cfg.mode, cfg.l)?]
    };
    let dir = prepare_out(cfg)?;
    let table = report::write_outputs(dir, cfg, &outcomes).map_err(|e| io_failure(dir, e))?;
    if verbose {
        for note in outcomes.first().map(|o| o.notes.as_slice()).unwrap_or_default() {
            eprintln!("note: {note}");
        }
        if let Ok(f) = pipeline::forecast_latest(&data, cfg) {
            eprint!("{}", f.model_dump);
        }
    }
    print!("{table}");
    Ok(())
}

fn show_report(cfg: &RunConfig) -> Result<(), Failure> {
    let path = cfg.output_dir.join(SUMMARY_CSV);
    let file = fs::File::open(&path).map_err(|e| io_failure(&path, e))?;
    let rows = read_summary_csv(file).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    print!("{}", format_table(&rows));
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = load_config(cli)?;
    match cli.command {
        Command::Ingest => ingest(&cfg),
        Command::Forecast => forecast(&cfg, cli.verbose),
        Command::Backtest => backtest(&cfg, false, cli.verbose),
        Command::Sweep => backtest(&cfg, true, cli.verbose),
        Command::Report => show_report(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Pipeline(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
