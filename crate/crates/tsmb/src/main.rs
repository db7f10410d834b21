//! The `tsmb` binary: train, benchmark, compare, inspect.

use clap::Parser;

use tsmb::commands::{cmd_benchmark, cmd_compare, cmd_inspect, cmd_train, init_pool};
use tsmb::config::{resolve_benchmark, Cli, Command};
use tsmb::CliError;

fn run(cli: Cli) -> Result<(), CliError> {
    let jobs = cli.jobs;
    match cli.command {
        Command::Train(args) => {
            init_pool(jobs);
            cmd_train(&args)
        }
        Command::Benchmark(args) => {
            let plan = resolve_benchmark(jobs, &args)?;
            cmd_benchmark(&plan)
        }
        Command::Compare(args) => cmd_compare(&args),
        Command::Inspect(args) => cmd_inspect(&args),
    }
}

fn main() {
    // Clap handles --help/--version itself and exits 2 on bad syntax,
    // matching the usage-error contract.
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
