use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use imnet::cli::{cmd_check, cmd_diff_trace, cmd_run, CliError, RunConfig};
use imnet::fabric::DefaultAction;

#[derive(Parser)]
#[command(name = "imnet", version, about = "Run ImNet controller programs on a simulated switch fabric")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum DefaultActionArg {
    SendController,
    Drop,
}

impl From<DefaultActionArg> for DefaultAction {
    fn from(arg: DefaultActionArg) -> Self {
        match arg {
            DefaultActionArg::SendController => DefaultAction::SendController,
            DefaultActionArg::Drop => DefaultAction::Drop,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse a program and check static well-formedness.
    Check {
        /// Path to the .imnet program
        program: PathBuf,
    },
    /// Execute a program against a topology and write the state trace.
    Run {
        #[arg(long)]
        topology: PathBuf,
        #[arg(long)]
        program: PathBuf,
        /// Packets to buffer before the program runs
        #[arg(long)]
        injections: Option<PathBuf>,
        /// Pre-seeded variable bindings (initial gamma)
        #[arg(long)]
        bindings: Option<PathBuf>,
        #[arg(long)]
        trace_out: PathBuf,
        /// What a switch does on a table miss
        #[arg(long, value_enum, default_value = "send-controller")]
        default_action: DefaultActionArg,
        /// Flood to every other switch instead of link neighbours
        #[arg(long)]
        global_broadcast: bool,
        /// Processing steps allowed per injected packet
        #[arg(long, default_value_t = 64)]
        hop_budget: u64,
    },
    /// Structurally compare two trace files.
    DiffTrace {
        actual: PathBuf,
        golden: PathBuf,
    },
}

fn report(err: CliError) -> ExitCode {
    eprintln!("imnet: {}", err.message());
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Check { program } => match cmd_check(&program) {
            Ok(()) => {
                println!("ok: {}", program.display());
                ExitCode::SUCCESS
            }
            Err(err) => report(err),
        },
        Command::Run {
            topology,
            program,
            injections,
            bindings,
            trace_out,
            default_action,
            global_broadcast,
            hop_budget,
        } => {
            let config = RunConfig {
                topology,
                program,
                injections,
                bindings,
                trace_out: trace_out.clone(),
                default_action: default_action.into(),
                global_broadcast,
                hop_budget,
            };
            match cmd_run(&config) {
                Ok(summary) => {
                    println!(
                        "wrote {} ({} snapshots, {} packets buffered, {} processed after run)",
                        trace_out.display(),
                        summary.snapshots,
                        summary.packets_buffered,
                        summary.packets_processed_after
                    );
                    ExitCode::SUCCESS
                }
                Err(err) => report(err),
            }
        }
        Command::DiffTrace { actual, golden } => match cmd_diff_trace(&actual, &golden) {
            Ok(()) => {
                println!("traces match");
                ExitCode::SUCCESS
            }
            Err(err) => report(err),
        },
    }
}
