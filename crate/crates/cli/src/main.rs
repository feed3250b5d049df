use std::process::ExitCode;

fn main() -> ExitCode {
    cci_cli::run(std::env::args_os())
}
