use std::path::PathBuf;

use thiserror::Error;

use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum ExpError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{module}: {source}")]
    Module {
        module: &'static str,
        source: chiral_gap_core::Error,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("suite run {axis} = {value} failed: {source}")]
    Suite {
        axis: &'static str,
        value: u64,
        source: Box<ExpError>,
    },
    #[error("{0}")]
    Other(String),
}

/// Tags a core error with the module it came from.
pub(crate) fn in_module(module: &'static str) -> impl Fn(chiral_gap_core::Error) -> ExpError {
    move |source| ExpError::Module { module, source }
}

pub(crate) fn io_at(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> ExpError {
    let path = path.into();
    move |source| ExpError::Io { path, source }
}
