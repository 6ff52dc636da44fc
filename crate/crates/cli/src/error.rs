use less_core::LessError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("data: {0}")]
    Data(String),
    #[error("numeric: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

fn exit_class(e: &LessError) -> i32 {
    match e {
        LessError::Fold { source, .. } => exit_class(source),
        LessError::InvalidConfig(_) | LessError::TooManySubsets { .. } | LessError::NegativeLambda(_) => 1,
        LessError::Numeric(_) => 3,
        _ => 2,
    }
}

impl From<LessError> for CliError {
    fn from(e: LessError) -> Self {
        let msg = e.to_string();
        match exit_class(&e) {
            1 => CliError::Usage(msg),
            3 => CliError::Numeric(msg),
            _ => CliError::Data(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
