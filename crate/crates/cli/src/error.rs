use std::path::PathBuf;

use hecke_core::ErrorKind;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error(transparent)]
    Core(#[from] hecke_core::Error),
    #[error("missing input {}", .0.display())]
    MissingInput(PathBuf),
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn param(msg: impl Into<String>) -> CliError {
    CliError::Param(msg.into())
}

pub fn io_at(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_PARAM: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_RESOURCE: i32 = 4;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Param(_) | CliError::MissingInput(_) => EXIT_PARAM,
            CliError::Core(e) => match e.kind() {
                ErrorKind::Parameter => EXIT_PARAM,
                ErrorKind::Numerical => EXIT_NUMERICAL,
                ErrorKind::Resource => EXIT_RESOURCE,
            },
            CliError::Io { .. } => EXIT_RESOURCE,
        }
    }

    fn category(&self) -> &'static str {
        match self.exit_code() {
            EXIT_PARAM => "parameter",
            EXIT_NUMERICAL => "numerical",
            _ => "resource",
        }
    }

    /// One-line machine-readable form for `--json-errors`.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Payload<'a> {
            error: &'a str,
            exit_code: i32,
            message: String,
        }
        let payload = Payload { error: self.category(), exit_code: self.exit_code(), message: self.to_string() };
        serde_json::to_string(&payload).expect("error payload serializes")
    }
}
