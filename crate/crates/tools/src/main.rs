use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(chanocc_tools::cli::run(std::env::args_os()))
}
