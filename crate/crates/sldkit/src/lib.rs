//! Command-line front end for `sldkit-core`: JSON model files, solver
//! dispatch, cross-validation and Cramér–Rao runs.

pub mod cli;
pub mod commands;
pub mod error;
pub mod model_file;
pub mod output;

use std::io::Write;

use cli::{Cli, Command};
use error::CliError;
use output::Emitter;

/// Runs a parsed command line, writing records to `out`.
pub fn run<W: Write>(cli: &Cli, out: W) -> Result<(), CliError> {
    match &cli.command {
        Command::Sld(a) => commands::cmd_sld(a, &mut Emitter::new(out, a.common.output)),
        Command::Qfi(a) => commands::cmd_qfi(a, &mut Emitter::new(out, a.common.output)),
        Command::Xval(a) => commands::cmd_xval(a, &mut Emitter::new(out, a.common.output)),
        Command::Crb(a) => commands::cmd_crb(a, &mut Emitter::new(out, a.common.output)),
    }
}
