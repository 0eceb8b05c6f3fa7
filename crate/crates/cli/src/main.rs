use std::process::ExitCode;

use clap::Parser;
use coupled_cli::args::{Cli, Command};
use coupled_cli::commands;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Render(a) => commands::cmd_render(a),
        Command::Sweep(a) => commands::cmd_sweep(a),
        Command::Cycle(a) => commands::cmd_cycle(a),
        Command::Stability(a) => commands::cmd_stability(a),
        Command::Serve(a) => commands::cmd_serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
