mod args;
mod commands;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::{Done, Failure, EXIT_USAGE};
use output::Format;

fn run(cli: &Cli, format: Format) -> Result<Done, Failure> {
    let name = match format {
        Format::Csv => "csv",
        Format::Json => "json",
        Format::Svg => "svg",
    };
    let c = &cli.common;
    match &cli.command {
        Command::Bounds(a) => commands::bounds(c, a, name),
        Command::Decide(a) => commands::decide_cmd(c, a, name),
        Command::Sample(a) => commands::sample(c, a, name),
        Command::Bench(a) => commands::bench(c, a, name),
        Command::VerifyProp1(a) => commands::verify_prop1_cmd(c, a, name),
        Command::VerifyLb(a) => commands::verify_lb(c, a, name),
        Command::Gof(a) => commands::gof(c, a, name),
        Command::Fit(a) => commands::fit(c, a, name),
        Command::CheckMonotone(a) => commands::check_monotone_cmd(c, a, name),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli
        .common
        .format
        .or_else(|| cli.common.out.as_deref().and_then(Format::from_extension))
        .unwrap_or(Format::Csv);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.common.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let done = match pool.install(|| run(&cli, format)) {
        Ok(d) => d,
        Err(f) => {
            eprintln!("error: {}", f.message);
            return ExitCode::from(f.code);
        }
    };
    let text = match done.report.render(format) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let written = match &cli.common.out {
        Some(path) => std::fs::write(path, text.as_bytes()),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::FAILURE;
    }
    ExitCode::from(done.code)
}
