//! `radinv`: invariant subspace detection experiments from the
//! command line. Closed-form operating points (`pfa`, `pd-curve`),
//! Monte Carlo simulation (`simulate`), and the executable property
//! suites (`verify`), all driven by JSON configs and emitting CSV or
//! JSON tables.

mod commands;
mod config;
mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use output::Format;

#[derive(Parser)]
#[command(
    name = "radinv",
    about = "Invariant adaptive detection of subspace signals: operating points, curves, and verification suites",
    version
)]
struct Cli {
    /// Worker threads for Monte Carlo runs (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a closed-form false-alarm probability at a threshold,
    /// or invert a target probability for the threshold.
    Pfa {
        /// Detector: glrt, 2s-glrt, lmpid, or ed.
        #[arg(long)]
        detector: String,
        /// Channel count.
        #[arg(long = "N")]
        n: usize,
        /// Secondary snapshot count.
        #[arg(long = "K")]
        k: usize,
        /// Signal subspace dimension.
        #[arg(long = "r")]
        r: usize,
        /// Interference subspace dimension.
        #[arg(long = "t")]
        t: usize,
        /// Threshold to evaluate.
        #[arg(long, conflicts_with = "pfa")]
        eta: Option<f64>,
        /// Target false-alarm probability to invert.
        #[arg(long)]
        pfa: Option<f64>,
    },
    /// Closed-form detection curves over the config's SINR grid.
    PdCurve {
        /// Experiment config (JSON).
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Monte Carlo experiment: calibrate thresholds, estimate
    /// detection probabilities, attach closed forms where they exist.
    Simulate {
        /// Experiment config (JSON).
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Run a verification suite: invariance, maximality,
    /// distributions, or identities.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 20_26_07_14)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
    },
}

pub fn run() -> i32 {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be positive");
            return commands::EXIT_USAGE;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: cannot configure thread pool: {e}");
            return commands::EXIT_NUMERICAL;
        }
    }
    // A panic anywhere below is a bug; report it as a numerical
    // failure instead of unwinding across main.
    let result = std::panic::catch_unwind(|| match &cli.command {
        Command::Pfa {
            detector,
            n,
            k,
            r,
            t,
            eta,
            pfa,
        } => commands::cmd_pfa(detector, *n, *k, *r, *t, *eta, *pfa),
        Command::PdCurve {
            config,
            output,
            format,
        } => commands::cmd_pd_curve(config, output.as_deref(), *format),
        Command::Simulate {
            config,
            output,
            format,
        } => commands::cmd_simulate(config, output.as_deref(), *format),
        Command::Verify { suite, seed, trials } => commands::cmd_verify(suite, *seed, *trials),
    });
    match result {
        Ok(code) => code,
        Err(_) => {
            eprintln!("error: internal numerical failure");
            commands::EXIT_NUMERICAL
        }
    }
}
