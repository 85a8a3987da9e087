//! Argument surface of the `fanoatom` binary.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};

use fanoatom::fitting::FitModel;

#[derive(Parser)]
#[command(
    name = "fanoatom",
    version,
    about = "Giant-atom transmission spectra, line-shape fits, and switch analysis"
)]
pub struct Cli {
    /// Configuration file (TOML).
    #[arg(long, global = true, default_value = "fanoatom.toml")]
    pub config: PathBuf,
    /// Output directory for data files, reports, and plots.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Evaluate the transmission spectrum on a frequency grid.
    Spectrum {
        /// Frequency grid lo:hi:count in GHz (overrides [grid]).
        #[arg(long)]
        grid: Option<GridArg>,
        /// Line-shape model.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Fit a measured or synthetic spectrum.
    Fit {
        /// Delimited data file: frequency_GHz, transmission[, sigma].
        #[arg(long)]
        data: PathBuf,
        /// Interpret the transmission column as dB.
        #[arg(long)]
        db: bool,
        /// Line-shape model.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Seed for the multi-start perturbations.
        #[arg(long)]
        seed: Option<u64>,
        /// Number of optimisation starts.
        #[arg(long)]
        multi_start: Option<usize>,
    },
    /// Relaxation time from the configured rates.
    T1,
    /// Transparency tunings across a scan window.
    Switch {
        /// Scan window lo:hi in GHz (overrides [switch]).
        #[arg(long)]
        scan: Option<ScanArg>,
    },
    /// Half-wavelength resonator decay and transmission.
    Resonator {
        /// Frequency grid lo:hi:count in GHz (overrides [grid]).
        #[arg(long)]
        grid: Option<GridArg>,
    },
    /// Cross-check the closed-form steady state against time-domain
    /// integration.
    Oracle {
        /// Number of detuning points.
        #[arg(long)]
        points: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Mioa,
    Msp,
    Lorentzian,
}

impl ModeArg {
    pub fn model(self) -> FitModel {
        match self {
            ModeArg::Mioa => FitModel::Mioa,
            ModeArg::Msp => FitModel::Msp,
            ModeArg::Lorentzian => FitModel::Lorentzian,
        }
    }
}

/// `lo:hi:count` frequency grid.
#[derive(Debug, Clone, Copy)]
pub struct GridArg {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl FromStr for GridArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err("expected lo:hi:count".into());
        }
        Ok(GridArg {
            lo: parts[0].parse().map_err(|e| format!("lo: {e}"))?,
            hi: parts[1].parse().map_err(|e| format!("hi: {e}"))?,
            count: parts[2].parse().map_err(|e| format!("count: {e}"))?,
        })
    }
}

/// `lo:hi` scan window.
#[derive(Debug, Clone, Copy)]
pub struct ScanArg {
    pub lo: f64,
    pub hi: f64,
}

impl FromStr for ScanArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 2 {
            return Err("expected lo:hi".into());
        }
        Ok(ScanArg {
            lo: parts[0].parse().map_err(|e| format!("lo: {e}"))?,
            hi: parts[1].parse().map_err(|e| format!("hi: {e}"))?,
        })
    }
}
