use std::process::ExitCode;

fn main() -> ExitCode {
    match cw11_cli::run_from(std::env::args_os()) {
        Ok(outcome) => {
            print!("{}", outcome.text);
            if let Some(err) = &outcome.report.error {
                eprintln!("error: {err}");
            }
            ExitCode::from(outcome.report.exit_status as u8)
        }
        // usage errors exit with 2, help and version with 0
        Err(e) => e.exit(),
    }
}
