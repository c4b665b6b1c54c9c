use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use compgate::cli::{error_report, exit_code_for, run, Cli, RunConfig};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (code, report) = match RunConfig::from_cli(&cli) {
        Ok(cfg) => {
            let out = run(&cfg);
            (out.exit_code, out.report)
        }
        Err(e) => (exit_code_for(&e), error_report(Some(cli.command), &e)),
    };
    if let Some(err) = report.get("error") {
        eprintln!("compgate: {}", err["message"].as_str().unwrap_or("error"));
    }
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    // a closed pipe downstream is not worth a panic
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    ExitCode::from(code as u8)
}
