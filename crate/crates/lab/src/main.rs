use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(thetalab::cli::run(std::env::args_os()))
}
