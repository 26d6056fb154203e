use std::process::ExitCode;

fn main() -> ExitCode {
    porous_inverse::cli::run(std::env::args_os())
}
