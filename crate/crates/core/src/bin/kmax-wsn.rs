//! Command-line front end: `run`, `compare`, `list-protocols`.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kmax_wsn::harness::{self, Metric, SUMMARY_FILE};
use kmax_wsn::{Error, ProtocolSpec};

#[derive(Parser)]
#[command(name = "kmax-wsn", version, about = "Heterogeneous WSN clustering experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every protocol/seed pair of an experiment file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Test whether protocol `a` beats protocol `b` on a metric.
    Compare {
        #[arg(long)]
        summary: PathBuf,
        #[arg(long)]
        metric: String,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Print the protocol names accepted in config files.
    ListProtocols,
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { config, out, jobs } => {
            let text = fs::read_to_string(&config).map_err(|source| Error::Io { path: config.clone(), source })?;
            let mut plan = harness::parse_config(&text)?;
            if let Some(out) = out {
                plan.output_dir = out;
            }
            let summary = harness::run_plan_with_jobs(&plan, jobs)?;
            for row in &summary.rows {
                let fd = row.get(Metric::FirstDeath);
                println!("{:<16} first_death {:>8.1} ± {:<6.1} ({} runs)", row.protocol, fd.mean, fd.sd, row.samples);
            }
            println!("wrote {}", plan.output_dir.join(SUMMARY_FILE).display());
        }
        Command::Compare { summary, metric, a, b } => {
            let table = harness::read_summary(&summary)?;
            let metric = Metric::parse(&metric)?;
            println!("{}", harness::compare(&table, metric, &a, &b)?);
        }
        Command::ListProtocols => {
            for p in ProtocolSpec::MATRIX {
                println!("{p}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
