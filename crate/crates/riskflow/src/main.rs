use std::process::ExitCode;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let mut stdout = std::io::stdout().lock();
    ExitCode::from(riskflow::cli::run(std::env::args_os(), &mut stdout))
}
