//! Command-line front end for fracstorm.

pub mod commands;
pub mod config;
pub mod output;
pub mod svg;

use clap::Parser;

use config::ConfigError;

/// 2 for domain, configuration and I/O errors; 1 for numerical and fit failures.
pub fn exit_code(e: &anyhow::Error) -> i32 {
    if let Some(fe) = e.downcast_ref::<fracstorm::Error>() {
        return match fe {
            fracstorm::Error::Numerical(_) | fracstorm::Error::Fit(_) => 1,
            fracstorm::Error::Domain(_) | fracstorm::Error::Io(_) => 2,
        };
    }
    if e.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    2
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match commands::Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match commands::dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}
