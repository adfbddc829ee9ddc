//! Library side of the `afford3d` command-line tool: configuration,
//! subcommand implementations, and a synthetic-scene generator used by the
//! examples and the end-to-end tests.

pub mod commands;
pub mod config;
pub mod synthetic;
