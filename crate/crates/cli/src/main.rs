//! `qkdsec`: reports, verification suites, counterexamples, and protocol
//! simulation with machine-readable output.
//!
//! Every command emits a JSON envelope (or a CSV table with `--format
//! csv`) carrying the seed, the resolved parameters, the results, and a
//! list of named numeric checks. Exit codes: 0 success, 1 check failure,
//! 2 usage error, 3 exact-mode capacity exceeded.

mod commands;
mod config;
mod envelope;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use commands::{CliError, CommandOutput};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Parser)]
#[command(
    name = "qkdsec",
    version,
    about = "Quantitative security bounds for QKD keys: what a criterion level actually buys"
)]
struct Cli {
    /// Output format: the JSON envelope or the command's CSV table.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Write output to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for every randomized quantity; defaults to QKDSEC_SEED or 1.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every bound for a preset or custom parameter set.
    Report {
        /// finite-key-bb84 | nec-decoy
        #[arg(long, conflicts_with_all = ["n", "d", "p1"])]
        preset: Option<String>,
        /// Key length in bits for a custom report.
        #[arg(long)]
        n: Option<u32>,
        /// Trace-distance level for a custom report.
        #[arg(long)]
        d: Option<f64>,
        /// Average whole-key guessing probability for a custom report.
        #[arg(long)]
        p1: Option<f64>,
        /// Markov applications for the individual conversion.
        #[arg(long, default_value_t = 2)]
        markov: u32,
        #[arg(long)]
        subset_bits: Option<u32>,
        #[arg(long)]
        kpa_bits: Option<u32>,
    },
    /// Run randomized property suites; nonzero exit if any check fails.
    Verify {
        /// eq1 | eq6 | eq7 | posterior | helstrom | markov | all
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 1000)]
        trials: u32,
        /// Test hook: append one deliberately failing check.
        #[arg(long, hide = true)]
        inject_failure: bool,
    },
    /// Build a counterexample construction and verify it on the spot.
    Counterexample {
        /// half-biased | kpa-spike | tightness
        #[arg(long)]
        kind: String,
        /// Outcome count for half-biased.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        eps: Option<f64>,
        /// Key bits for kpa-spike and tightness.
        #[arg(long)]
        bits: Option<u32>,
        /// Known-segment bits for kpa-spike.
        #[arg(long)]
        known: Option<u32>,
        /// Worst-case conditional success to demand for kpa-spike.
        #[arg(long)]
        spike: Option<f64>,
    },
    /// Run the protocol once, or sweep a (q, l) grid with exact checks.
    Simulate {
        /// Raw qubit transmissions.
        #[arg(long)]
        m: Option<usize>,
        /// Intercept fraction in [0, 1].
        #[arg(long)]
        q: Option<f64>,
        /// Final key bits.
        #[arg(long)]
        l: Option<u32>,
        /// random-bb84-basis | fixed-basis | breidbart
        #[arg(long)]
        strategy: Option<String>,
        #[arg(long)]
        sample_fraction: Option<f64>,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        ec_efficiency: Option<f64>,
        /// Compute the exact joint distribution and append bound checks.
        #[arg(long)]
        exact: bool,
        /// Grid spec like `q=0:0.25:1,l=2:2:8`; runs in exact mode.
        #[arg(long)]
        sweep: Option<String>,
        /// Flat key-value config file; flags override file entries.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Include the exact joint matrix in the output (small instances).
        #[arg(long)]
        emit_joint: bool,
    },
}

fn env_seed() -> Result<Option<u64>, CliError> {
    match std::env::var("QKDSEC_SEED") {
        Ok(raw) => raw
            .parse::<u64>()
            .map(Some)
            .map_err(|e| CliError::usage(format!("QKDSEC_SEED: {e}"))),
        Err(_) => Ok(None),
    }
}

fn dispatch(cli: &Cli) -> Result<CommandOutput, CliError> {
    let env = env_seed()?;
    let seed = cli.seed.or(env).unwrap_or(1);
    match &cli.command {
        Command::Report {
            preset,
            n,
            d,
            p1,
            markov,
            subset_bits,
            kpa_bits,
        } => commands::cmd_report(
            &commands::ReportArgs {
                preset: preset.clone(),
                n: *n,
                d: *d,
                p1: *p1,
                markov: *markov,
                subset_bits: *subset_bits,
                kpa_bits: *kpa_bits,
            },
            seed,
        ),
        Command::Verify {
            suite,
            trials,
            inject_failure,
        } => {
            let suite = suite.parse().map_err(CliError::usage)?;
            commands::cmd_verify(suite, *trials, seed, *inject_failure)
        }
        Command::Counterexample {
            kind,
            n,
            eps,
            bits,
            known,
            spike,
        } => commands::cmd_counterexample(
            &commands::CounterexampleArgs {
                kind: kind.clone(),
                n: *n,
                eps: *eps,
                bits: *bits,
                known: *known,
                spike: *spike,
            },
            seed,
        ),
        Command::Simulate {
            m,
            q,
            l,
            strategy,
            sample_fraction,
            threshold,
            ec_efficiency,
            exact,
            sweep,
            config,
            emit_joint,
        } => commands::cmd_simulate(
            &commands::SimulateArgs {
                m: *m,
                q: *q,
                l: *l,
                strategy: strategy.clone(),
                sample_fraction: *sample_fraction,
                threshold: *threshold,
                ec_efficiency: *ec_efficiency,
                exact: *exact,
                sweep: sweep.clone(),
                config: config.clone(),
                emit_joint: *emit_joint,
            },
            cli.seed,
            env,
        ),
    }
}

fn emit(cli: &Cli, output: &CommandOutput) -> std::io::Result<()> {
    let rendered = match cli.format {
        Format::Json => output.envelope.to_json(),
        Format::Csv => output.table.render(),
    };
    match &cli.out {
        Some(path) => std::fs::write(path, rendered),
        None => {
            print!("{rendered}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(output) => {
            if let Err(e) = emit(&cli, &output) {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(2);
            }
            if output.envelope.any_check_failed() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(CliError::Usage(msg, payload)) => {
            if let Some(output) = payload {
                let _ = emit(&cli, &output);
            }
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Capacity(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
