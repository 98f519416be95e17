use care_core::CareError;
use thiserror::Error;

/// Process exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const PARSE: i32 = 3;
    pub const CONNECTIVITY: i32 = 4;
    pub const CONVERGENCE: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CareError),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    ConfigFile { path: String, source: toml::de::Error },

    #[error("fit did not converge: {0}")]
    Convergence(String),

    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e {
                CareError::Parse { .. } => exit::PARSE,
                CareError::Disconnected { .. } => exit::CONNECTIVITY,
                CareError::Io(_) => exit::IO,
                CareError::Config(_)
                | CareError::InvalidArgument(_)
                | CareError::DimensionMismatch { .. }
                | CareError::DegenerateDesign { .. }
                | CareError::DegenerateColumn { .. }
                | CareError::DegenerateContrast => exit::CONFIG,
            },
            CliError::Config(_) => exit::CONFIG,
            CliError::ConfigFile { .. } => exit::CONFIG,
            CliError::Convergence(_) => exit::CONVERGENCE,
            CliError::Io(_) => exit::IO,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Io(err.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(err: serde_json::Error) -> Self {
        CliError::Io(err.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
