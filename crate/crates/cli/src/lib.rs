//! Command-line front end for the cognitive-hierarchy pipeline.

pub mod args;
pub mod common;
pub mod error;
pub mod table;

mod commands {
    pub mod collect;
    pub mod fit;
    pub mod games;
    pub mod report;
    pub mod simulate;
}

use clap::Parser;

pub use args::Cli;
pub use error::CliError;

pub fn run(cli: &Cli) -> error::Result<()> {
    use args::Command;
    match &cli.command {
        Command::Games { action } => commands::games::run(cli, action),
        Command::Simulate(a) => commands::simulate::run(cli, a),
        Command::Fit(a) => commands::fit::run(cli, a),
        Command::SelectK(a) => commands::fit::select_k(cli, a),
        Command::Report(a) => commands::report::run(cli, a),
        Command::Collect(a) => commands::collect::run(cli, a),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
