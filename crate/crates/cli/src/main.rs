mod args;
mod cache;
mod commands;
mod error;
mod functions;
mod record;

use clap::Parser;

fn main() {
    let cli = args::Cli::parse();
    if let Err(e) = commands::dispatch(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
