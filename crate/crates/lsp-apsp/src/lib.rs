//! File formats, the experiment harness and the command-line front end for
//! [`lsp_apsp_core`].

pub mod cli;
pub mod experiments;
pub mod io;

use std::path::PathBuf;

pub use lsp_apsp_core as core;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] lsp_apsp_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Stream(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("resource guard: {0}")]
    Resource(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
