mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Correlation analysis and photon-counting simulation for symmetric three-beam Gaussian states.
#[derive(Debug, Parser)]
#[command(name = "tribeam", version)]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct Common {
    /// TOML config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Analysis order: 2, 4, 6 or all.
    #[arg(long)]
    pub order: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Grid points per axis of region maps.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Usability threshold (sweep, convergence) or EM tolerance (reconstruct).
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Entanglement region, steering regions, GHZ/W class and coexistence of (μ₁, μ₂).
    Classify {
        mu1: f64,
        mu2: f64,
        /// Seralian; adds point values of the measures.
        delta2: Option<f64>,
    },
    /// Measures with bounds and errors; Δ₂ defaults to the GHZ/W state.
    Measures {
        mu1: f64,
        mu2: f64,
        #[arg(long)]
        delta2: Option<f64>,
    },
    /// Region maps, model noise curves, thresholds and Monte Carlo estimates.
    Sweep(Common),
    /// Usable analysis orders against the number of realizations.
    Convergence(Common),
    /// Simulate photocount histograms.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Mode number (default: first configured).
        #[arg(long)]
        modes: Option<f64>,
        #[arg(long, short = 'n')]
        realizations: Option<u64>,
        /// Use ideal detectors.
        #[arg(long)]
        ideal: bool,
    },
    /// EM photon-number reconstruction and moment analysis of a histogram.
    Reconstruct {
        #[command(flatten)]
        common: Common,
        /// Histogram CSV (c1,c2,c3,count).
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        modes: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
        #[arg(long)]
        ideal: bool,
    },
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.command {
        Command::Classify { mu1, mu2, delta2 } => commands::classify(mu1, mu2, delta2),
        Command::Measures { mu1, mu2, delta2 } => commands::measures(mu1, mu2, delta2),
        Command::Sweep(c) => commands::sweep(&c),
        Command::Convergence(c) => commands::convergence(&c),
        Command::Simulate {
            common,
            noise,
            modes,
            realizations,
            ideal,
        } => commands::simulate(&common, noise, modes, realizations, ideal),
        Command::Reconstruct {
            common,
            input,
            modes,
            max_iter,
            ideal,
        } => commands::reconstruct(&common, &input, modes, max_iter, ideal),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
