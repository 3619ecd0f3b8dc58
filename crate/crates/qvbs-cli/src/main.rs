//! Command line front end for the qvbs library.
//!
//! Exit status: 0 when every requested check passes, 1 when a numerical
//! check fails, 2 on invalid configuration (including over-budget requests).

mod correlate;
mod grid;
mod output;
mod spectrum;
mod verify;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "qvbs",
    version,
    about = "Transfer-matrix spectra and spin correlators of q-deformed higher-spin VBS chains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form transfer-matrix spectrum with dense cross-checks
    Spectrum(spectrum::SpectrumArgs),
    /// Two-point function tables: finite rings, thermodynamic limit, asymptotics
    Correlate(correlate::CorrelateArgs),
    /// Brute-force oracle suite on small rings
    Verify(verify::VerifyArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Spectrum(args) => spectrum::run(&args),
        Command::Correlate(args) => correlate::run(&args),
        Command::Verify(args) => verify::run(&args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
