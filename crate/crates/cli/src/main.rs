mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn log_config<T: serde::Serialize>(name: &str, args: &T) {
    match serde_json::to_string(args) {
        Ok(json) => log::info!("{name} config: {json}"),
        Err(e) => log::warn!("cannot serialize {name} config: {e}"),
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if cli.jobs > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global()?;
    }
    match &cli.command {
        Command::Synth(a) => {
            log_config("synth", a);
            commands::synth(a)
        }
        Command::Train(a) => {
            log_config("train", a);
            commands::train(a)
        }
        Command::Optimize(a) => {
            log_config("optimize", a);
            commands::optimize(a)
        }
        Command::Evaluate(a) => {
            log_config("evaluate", a);
            commands::evaluate(a)
        }
        Command::Keep(a) => {
            log_config("keep", a);
            commands::keep(a)
        }
        Command::Render(a) => {
            log_config("render", a);
            commands::render(a)
        }
        Command::Serve(a) => {
            log_config("serve", a);
            commands::serve(a)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
