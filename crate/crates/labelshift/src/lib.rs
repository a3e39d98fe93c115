//! File formats, embedding loaders, a remote embedding client and the
//! `labelshift` command-line tool built on [`labelshift_core`].

pub mod cli;
pub mod conll;
mod error;
pub mod formats;
pub mod jsonl;
pub mod parallel;
pub mod remote;
pub mod vectors;

pub use error::{Error, Result};
