use clap::Parser;
use vlmarket::args::Cli;
use vlmarket::commands::{run, EXIT_FAIL};

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_FAIL
        }
    };
    std::process::exit(code);
}
