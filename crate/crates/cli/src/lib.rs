//! Library side of the `cornerlab` command: file formats and the commands
//! themselves, so they can be driven from tests without a subprocess.

pub mod commands;
pub mod setfile;
pub mod sweep;

pub use commands::CliError;
pub use setfile::{SetFile, SetFileError};
pub use sweep::SweepRow;
