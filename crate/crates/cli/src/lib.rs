//! Configuration, CSV output and command implementations behind the
//! `krylovmp` binary.

pub mod commands;
pub mod config;
pub mod report;
