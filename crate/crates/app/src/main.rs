use std::process::ExitCode;

fn main() -> ExitCode {
    hiertable_app::cli::run(std::env::args_os())
}
