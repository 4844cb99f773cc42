use std::process::ExitCode;

use clap::Parser;
use selfdual::cli::{run, usage_error, Cli};

fn main() -> ExitCode {
    let report = match Cli::try_parse() {
        Ok(cli) => run(&cli),
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            usage_error(&e.to_string())
        }
    };
    print!("{}", report.to_json());
    ExitCode::from(report.exit_code as u8)
}
