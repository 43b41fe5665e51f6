use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use reciprocity_cli::{error_json, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = std::io::stdout().lock();
    // a closed pipe is not an error worth reporting
    let (text, pass) = match run(&cli) {
        Ok(report) => {
            let text = if cli.json {
                format!("{}\n", serde_json::to_string_pretty(&report.to_json()).unwrap())
            } else {
                report.to_table()
            };
            (text, report.pass)
        }
        Err(e) => {
            if cli.json {
                (format!("{}\n", serde_json::to_string_pretty(&error_json(&e)).unwrap()), false)
            } else {
                eprintln!("error: {e}");
                (String::new(), false)
            }
        }
    };
    let _ = out.write_all(text.as_bytes());
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
