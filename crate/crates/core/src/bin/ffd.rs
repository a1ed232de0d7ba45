use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(ffd_core::cli::run(std::env::args_os()) as u8)
}
