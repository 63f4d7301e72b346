//! File formats, caching, the parallel automorphism driver and the `tropmod` CLI.

pub mod aut;
pub mod cache;
pub mod cli;
pub mod error;
pub mod format;
pub mod verify;

pub use error::CliError;
