use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use metaward_cli::{run_to_destination, RunConfig, EXIT_USAGE};

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("METAWARD_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .map_err(|_| format!("METAWARD_THREADS must be a positive integer, got `{value}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let config = match RunConfig::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_USAGE as u8);
    }
    let outcome = run_to_destination(&config);
    if outcome.code == EXIT_USAGE {
        eprint!("{}", outcome.output);
    } else {
        let mut stdout = std::io::stdout().lock();
        let _ = stdout.write_all(outcome.output.as_bytes());
    }
    ExitCode::from(outcome.code as u8)
}
