//! `schatten-lab`: batch front end for inequality fuzzing, alignment runs and
//! recovery experiments.
//!
//! Exit codes: 0 when every check passed or the experiment completed, 1 when a
//! verification failed or the run hit a runtime error, 2 on usage errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use clap::{Parser, Subcommand};
use schatten_core::LabError;

mod align;
mod recover;
mod verify;

pub use align::AlignArgs;
pub use recover::{NullspaceArgs, PhaseArgs, RecoverArgs, RipArgs};
pub use verify::VerifyArgs;

#[derive(Debug, Parser)]
#[command(
    name = "schatten-lab",
    version,
    about = "Concave singular-value inequalities and Schatten-p recovery experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fuzz inequalities over a seeded ensemble, or re-run one check on saved matrices.
    Verify(VerifyArgs),
    /// Commutator descent over the orthogonal group; writes a JSON-lines trace.
    Align(AlignArgs),
    /// Solve one Schatten-p recovery instance by IRLS.
    Recover(RecoverArgs),
    /// Sample the nullspace condition of a Gaussian operator.
    Nullspace(NullspaceArgs),
    /// Success-rate table of IRLS over a (p, l) grid.
    Phase(PhaseArgs),
    /// Monte Carlo lower bounds on restricted isometry constants.
    Rip(RipArgs),
}

/// Outcome of a subcommand that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Completed,
    VerificationFailed,
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Verify(args) => verify::run(args),
        Command::Align(args) => align::run(args),
        Command::Recover(args) => recover::run_recover(args),
        Command::Nullspace(args) => recover::run_nullspace(args),
        Command::Phase(args) => recover::run_phase(args),
        Command::Rip(args) => recover::run_rip(args),
    };
    match result {
        Ok(Outcome::Completed) => 0,
        Ok(Outcome::VerificationFailed) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                LabError::InvalidInput(_)
                | LabError::Parse(_)
                | LabError::NotWellBehaved(_)
                | LabError::DistinctnessViolated(_) => 2,
                _ => 1,
            }
        }
    }
}

/// Default seed: `--seed`, then `SCHATTEN_LAB_SEED`, then 0.
pub(crate) const SEED_ENV: &str = "SCHATTEN_LAB_SEED";

pub(crate) fn open_output(path: Option<&Path>) -> schatten_core::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub(crate) fn write_json_line<W: Write + ?Sized, T: serde::Serialize>(
    out: &mut W,
    value: &T,
) -> schatten_core::Result<()> {
    serde_json::to_writer(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

pub(crate) fn usage(msg: impl Into<String>) -> LabError {
    LabError::InvalidInput(msg.into())
}
