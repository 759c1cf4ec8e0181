use clap::Parser;
use qbicoherent::cli::{self, Cli};

fn main() {
    let cli = Cli::parse();
    match cli::run(&cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(cli::EXIT_USAGE);
        }
    }
}
