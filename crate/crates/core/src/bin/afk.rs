use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let out = afk_core::io::cli::run(std::env::args_os(), &mut std::io::stdin().lock());
    // write each stream in one call so output is never interleaved
    let _ = std::io::stdout().lock().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().lock().write_all(out.stderr.as_bytes());
    ExitCode::from(out.code as u8)
}
