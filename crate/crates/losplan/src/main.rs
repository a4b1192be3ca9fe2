use clap::Parser;

use losplan::cli::{run, Cli};

fn main() {
    let config = Cli::parse().into_config();
    if let Err(err) = run(&config) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
