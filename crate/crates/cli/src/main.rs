use std::io::Write;
use std::process::ExitCode;

use homsim_cli::{error_exit_code, execute, parse_args, CliError, EXIT_CHECK_FAILED};

fn main() -> ExitCode {
    let inv = match parse_args(std::env::args_os()) {
        Ok(inv) => inv,
        Err(CliError::Clap(e)) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let outcome = match execute(&inv) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(error_exit_code(&e) as u8);
        }
    };
    let written = match &inv.config.output_path {
        Some(path) => std::fs::write(path, outcome.body.as_bytes()),
        None => std::io::stdout().lock().write_all(outcome.body.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(EXIT_CHECK_FAILED as u8);
    }
    for line in &outcome.failures {
        eprintln!("{line}");
    }
    ExitCode::from(outcome.exit_code() as u8)
}
