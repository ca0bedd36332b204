use std::path::PathBuf;

use metastable_core::chain::ChainError;
use metastable_core::dirichlet::DirichletError;
use metastable_core::gamma::GammaError;
use metastable_core::landscape::LandscapeError;
use metastable_core::sde::SdeError;
use metastable_core::tree::TreeError;
use thiserror::Error;

/// Errors of a CLI run. All of them are input problems (exit code 2);
/// failed checks are reported through [`crate::Outcome`] instead.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("{path}: schema error: {source}")]
    Schema { path: PathBuf, source: serde_json::Error },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error(transparent)]
    Landscape(#[from] LandscapeError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Gamma(#[from] GammaError),
    #[error(transparent)]
    Dirichlet(#[from] DirichletError),
    #[error(transparent)]
    Sde(#[from] SdeError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn argument(msg: impl Into<String>) -> Self {
        CliError::Argument(msg.into())
    }
}
