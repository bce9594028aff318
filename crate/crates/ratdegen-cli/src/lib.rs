//! File schemas, subcommand drivers and the verification battery behind the
//! `ratdegen` binary.

pub mod commands;
pub mod io;
pub mod suite;
