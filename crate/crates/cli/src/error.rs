use std::fmt;
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Usage,
    Input,
    Backend,
    Internal,
}

impl Kind {
    pub fn exit_code(self) -> ExitCode {
        ExitCode::from(match self {
            Kind::Usage => 2,
            Kind::Input => 3,
            Kind::Backend => 4,
            Kind::Internal => 5,
        })
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: Kind,
    pub source: anyhow::Error,
}

impl CliError {
    pub fn new(kind: Kind, message: impl fmt::Display) -> Self {
        CliError { kind, source: anyhow::anyhow!("{message}") }
    }

    pub fn usage(message: impl fmt::Display) -> Self {
        CliError::new(Kind::Usage, message)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.source)
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Tags any error with an exit category.
pub trait Classify<T> {
    fn or_kind(self, kind: Kind) -> CliResult<T>;

    fn usage(self) -> CliResult<T>
    where
        Self: Sized,
    {
        self.or_kind(Kind::Usage)
    }

    fn input(self) -> CliResult<T>
    where
        Self: Sized,
    {
        self.or_kind(Kind::Input)
    }

    fn internal(self) -> CliResult<T>
    where
        Self: Sized,
    {
        self.or_kind(Kind::Internal)
    }
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn or_kind(self, kind: Kind) -> CliResult<T> {
        self.map_err(|e| CliError { kind, source: e.into() })
    }
}
