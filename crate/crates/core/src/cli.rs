//! Command-line front end: `locate`, `simulate`, `spectrum` and `modes`.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::config::PipelineConfig;
use crate::error::Result;
use crate::io::{load_config, load_pmu_csv, load_scenario, write_pmu_csv, write_report, write_spectra, ReportRecord};
use crate::locator::locate;
use crate::signal_prep::detrend;
use crate::simulator::{natural_modes, simulate, solve_equilibrium};
use crate::spectrum::channel_spectra;
use crate::types::Verdict;

#[derive(Debug, Parser)]
#[command(name = "forced-osc", version, about = "Forced-oscillation source localization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Locate forcing sources in a PMU window.
    Locate {
        #[arg(long)]
        input: PathBuf,
        /// Pipeline settings (TOML); defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Report destination (JSON); printed to stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Simulate a scenario and write the window as PMU CSV.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Write the amplitude spectrum of every channel.
    Spectrum {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Print the natural modes of a scenario's model.
    Modes {
        #[arg(long)]
        scenario: PathBuf,
    },
}

/// Exit status of a finished command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Located,
    NotLocated,
    Done,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Located | Outcome::Done => 0,
            Outcome::NotLocated => 2,
        }
    }
}

fn run_locate(input: PathBuf, config: Option<PathBuf>, output: Option<PathBuf>) -> Result<Outcome> {
    let config = match config {
        Some(path) => load_config(path)?,
        None => PipelineConfig::default(),
    };
    let window = load_pmu_csv(&input)?;
    let started = Instant::now();
    let outcome = locate(&window, &config);
    let record = ReportRecord::from_outcome(outcome, &config, started.elapsed().as_secs_f64())?;
    match output {
        Some(path) => write_report(&record, path)?,
        None => println!(
            "{}",
            serde_json::to_string_pretty(&record).map_err(|e| crate::Error::Serialization(e.to_string()))?
        ),
    }
    eprintln!("{}", record.verdict.as_str());
    const SHOWN: usize = 10;
    for d in record.detections.iter().take(SHOWN) {
        eprintln!(
            "  #{} {} at {:.4} Hz, zeta {:.4e}",
            d.rank, d.machine, d.frequency_hz, d.zeta
        );
    }
    if record.detections.len() > SHOWN {
        eprintln!("  ... {} more in the report", record.detections.len() - SHOWN);
    }
    Ok(if record.verdict == Verdict::SourceLocated {
        Outcome::Located
    } else {
        Outcome::NotLocated
    })
}

fn run_simulate(scenario: PathBuf, output: PathBuf) -> Result<Outcome> {
    let scenario = load_scenario(scenario)?;
    let model = scenario.build_model()?;
    let window = simulate(&model, &scenario.forcing, &scenario.options())?;
    write_pmu_csv(&window, &output)?;
    eprintln!(
        "wrote {} samples of {} machines at {} Hz to {}",
        window.len(),
        window.machines(),
        window.sample_rate(),
        output.display()
    );
    Ok(Outcome::Done)
}

fn run_spectrum(input: PathBuf, output: PathBuf) -> Result<Outcome> {
    let window = detrend(&load_pmu_csv(input)?);
    write_spectra(&channel_spectra(&window)?, output)?;
    Ok(Outcome::Done)
}

fn run_modes(scenario: PathBuf) -> Result<Outcome> {
    let model = load_scenario(scenario)?.build_model()?;
    let eq = solve_equilibrium(&model)?;
    println!("frequency_hz,damping_ratio");
    for mode in natural_modes(&model, &eq)? {
        println!("{:.6},{:.6}", mode.frequency_hz, mode.damping_ratio);
    }
    Ok(Outcome::Done)
}

pub fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Locate { input, config, output } => run_locate(input, config, output),
        Command::Simulate { scenario, output } => run_simulate(scenario, output),
        Command::Spectrum { input, output } => run_spectrum(input, output),
        Command::Modes { scenario } => run_modes(scenario),
    }
}

/// Parses arguments, runs, and maps errors (usage errors included) to exit
/// status 1.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(outcome) => ExitCode::from(outcome.code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
