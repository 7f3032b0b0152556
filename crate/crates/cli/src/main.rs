use std::process::ExitCode;

use bemalg::Error;
use bemalg_cli::{run, Cli, Report};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command, &cli.config) {
        Ok(report) => {
            let written = report.write(&cli.config.out);
            print!("{}", report.render());
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e @ Error::InvalidArgument(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            let mut report = Report::new(&format!("{:?} failed", cli.command));
            report.line(format!("error: {e}"));
            report.check("run completed", false, e.to_string());
            if let Err(w) = report.write(&cli.config.out) {
                eprintln!("error: {w}");
            }
            ExitCode::from(1)
        }
    }
}
