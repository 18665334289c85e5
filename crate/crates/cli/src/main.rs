use std::process::ExitCode;

use clap::Parser;
use dyadlab_cli::app::{run, Cli};
use dyadlab_cli::output::emit;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = emit(&outcome.text, cli.out.as_deref()) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    for (path, text) in &outcome.extra {
        if let Err(e) = emit(text, Some(path)) {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    eprint!("{}", outcome.summary);
    if outcome.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
