use clap::error::ErrorKind;
use clap::Parser;

use somiap::cli::{run, Cli};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are successful outputs, not usage errors
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                std::process::exit(0);
            }
            eprintln!("{e}");
            std::process::exit(1);
        }
    };
    match run(cli.command) {
        Ok(output) => {
            print!("{output}");
        }
        Err(e) => {
            eprintln!("somiap: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
