use std::process::ExitCode;

fn main() -> ExitCode {
    let verbose = matches!(std::env::args().nth(1).as_deref(), Some("train"));
    let default = if verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(default))
        .format_timestamp(None)
        .init();
    let mut stdout = std::io::stdout().lock();
    let code = borrowtag::cli::run(std::env::args_os(), &mut stdout);
    ExitCode::from(u8::try_from(code).unwrap_or(1))
}
