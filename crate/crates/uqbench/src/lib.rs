//! File formats, report writers and the `uqbench` command-line tool built on
//! [`uqbench_core`].

pub mod cli;
mod error;
pub mod imageio;
pub mod jsonl;
pub mod manifest;
pub mod methods;
pub mod tables;

pub use error::{Error, Result};
