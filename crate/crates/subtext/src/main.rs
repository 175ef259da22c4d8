use std::process::ExitCode;

use clap::Parser;

use subtext::cli::{self, Cli, Command};
use subtext::run;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::TrainBpe(opts) => run::cmd_train_bpe(&cli::resolve(&opts)?),
        Command::Encode(opts) => run::cmd_encode(&cli::resolve(&opts)?),
        Command::Train(opts) => run::cmd_train(&cli::resolve(&opts)?),
        Command::Predict(opts) => run::cmd_predict(&cli::resolve(&opts)?),
        Command::Evaluate(opts) => run::cmd_evaluate(&cli::resolve(&opts)?),
        Command::Cv(opts) => run::cmd_cv(&cli::resolve(&opts)?),
    }
}
