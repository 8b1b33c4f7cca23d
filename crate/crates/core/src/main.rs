use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let outcome = cubic_span::cli::run_command(std::env::args_os());
    if let Some(report) = &outcome.report {
        let mut stdout = std::io::stdout().lock();
        let _ = stdout.write_all(report.as_bytes());
    }
    if let Some(message) = &outcome.message {
        eprintln!("{}", message.trim_end());
    }
    ExitCode::from(outcome.exit_code as u8)
}
