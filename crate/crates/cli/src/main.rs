use std::path::PathBuf;
use std::process::ExitCode;

use chi2fc_cli::{run_correlations, run_rate_sweep, run_validity, CliResult, RunOptions, Scenario};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "chi2fc",
    version,
    about = "Single-photon frequency conversion in a chi(2) crystal"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Peak photon rate versus crystal length.
    RateSweep(Common),
    /// g1 and g2 versus delay.
    Correlations(Common),
    /// Approximation validity report.
    Validity {
        #[command(flatten)]
        common: Common,
        /// Conversion order n (L = (2n+1) L0); overrides the scenario.
        #[arg(long)]
        n: Option<u32>,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Cross-check closed-form coefficients against RK4.
    #[arg(long)]
    oracle: bool,
}

impl Common {
    fn options(&self) -> RunOptions {
        RunOptions {
            threads: self.threads,
            oracle: self.oracle,
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Cmd::RateSweep(c) => {
            run_rate_sweep(&Scenario::load(&c.scenario)?, &c.out, c.options()).map(drop)
        }
        Cmd::Correlations(c) => {
            run_correlations(&Scenario::load(&c.scenario)?, &c.out, c.options()).map(drop)
        }
        Cmd::Validity { common: c, n } => {
            run_validity(&Scenario::load(&c.scenario)?, &c.out, n, c.options()).map(drop)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
