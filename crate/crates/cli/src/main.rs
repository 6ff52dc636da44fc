mod args;
mod commands;
mod error;
mod io;
mod manifest;

use clap::error::ErrorKind;
use clap::Parser;

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match args::Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = commands::run(cli, argv[1..].to_vec()) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
