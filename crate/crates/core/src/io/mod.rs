//! Input and output: the GSF text format, the seeded instance generator and
//! the command-line driver.

pub mod cli;
pub mod gen;
pub mod gsf;
