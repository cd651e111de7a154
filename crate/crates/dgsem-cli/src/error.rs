use std::io;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("spec: {0}")]
    Spec(String),
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Core(#[from] dgsem_core::Error),
    #[error("{context}: {source}")]
    Run {
        context: String,
        #[source]
        source: dgsem_core::Error,
    },
}

pub type Result<T> = std::result::Result<T, HarnessError>;
