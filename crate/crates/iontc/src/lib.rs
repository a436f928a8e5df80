//! File formats and the command-line front end around `iontc-core`.

pub mod commands;
pub mod config;
pub mod report;
pub mod resolve;
