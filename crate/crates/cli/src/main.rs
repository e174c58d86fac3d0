use std::process::ExitCode;

use clap::Parser;
use gremlab_cli::{Cli, Invalid, EXIT_INVALID, EXIT_IO};

fn exit_code(e: &anyhow::Error) -> i32 {
    if e.downcast_ref::<Invalid>().is_some() || e.downcast_ref::<gremlab::Error>().is_some() {
        EXIT_INVALID
    } else {
        EXIT_IO
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.common.threads {
        if n == 0 {
            eprintln!("error: --threads must be >= 1");
            return ExitCode::from(EXIT_INVALID as u8);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .expect("thread pool is built once");
    }
    let code = match gremlab_cli::run(&cli) {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
