fn main() -> std::process::ExitCode {
    std::process::ExitCode::from(shallowsep::cli::run_from_args(std::env::args_os()))
}
