use std::io::Write;
use std::process::ExitCode;

use wforms::cli::{run, EXIT_INVALID};

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("WF_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("WF_THREADS must be a positive integer, got '{raw}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    if let Err(message) = configure_threads() {
        let body = serde_json::json!({ "error": { "kind": "Usage", "message": message, "exit_code": EXIT_INVALID } });
        eprintln!("{body}");
        return ExitCode::from(EXIT_INVALID as u8);
    }
    let outcome = run(std::env::args_os());
    std::io::stdout().write_all(outcome.stdout.as_bytes()).ok();
    std::io::stderr().write_all(outcome.stderr.as_bytes()).ok();
    ExitCode::from(outcome.code as u8)
}
