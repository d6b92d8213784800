//! Configuration-driven front end for the optomech simulator.
//!
//! Each subcommand reads a [`config::SimulationConfig`], runs one
//! computation from `optomech-core` and writes a CSV table (or a key-value
//! body) plus a [`output::RunReport`].

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use error::CliError;
