use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use delaymatch::cli::{self, SimulateOptions, EXIT_USAGE};

#[derive(Parser)]
#[command(
    name = "delaymatch",
    version,
    about = "Delay-dependent model-matching controller synthesis and simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derive gains, check constraints and report the delay margin.
    Synth {
        #[arg(long)]
        config: PathBuf,
    },
    /// Simulate the closed-loop step responses and write a trajectory CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Override the transmission delay (s).
        #[arg(long)]
        tau: Option<f64>,
        /// Override the integration step (s).
        #[arg(long)]
        step: Option<f64>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Simulate even when tau is not below tau_max.
        #[arg(long)]
        allow_unstable: bool,
    },
    /// Evaluate verdicts, envelopes and matching errors over a list of delays.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated delays or an inclusive range start:stop:step (s).
        #[arg(long)]
        tau: String,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn finish(text: String, code: i32) -> ExitCode {
    if code == 0 {
        print!("{text}");
    } else {
        eprint!("{text}");
    }
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let args = match Cli::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match args.command {
        Command::Synth { config } => {
            let o = cli::cmd_synth(&config);
            finish(o.text, o.code)
        }
        Command::Simulate {
            config,
            tau,
            step,
            out,
            allow_unstable,
        } => {
            let o = cli::cmd_simulate(
                &config,
                &SimulateOptions {
                    tau,
                    step,
                    out,
                    allow_unstable,
                },
            );
            finish(o.text, o.code)
        }
        Command::Sweep {
            config,
            tau,
            step,
            out,
        } => {
            let taus = match cli::parse_tau_list(&tau) {
                Ok(t) => t,
                Err(e) => return finish(format!("error: {e}\n"), EXIT_USAGE),
            };
            let o = cli::cmd_sweep(&config, &taus, step, out.as_deref());
            finish(o.text, o.code)
        }
    }
}
