use std::fmt;

/// Failure classes, each with its process exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    InvalidConfig,
    ResourceCap,
    Verification,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::InvalidConfig => 2,
            ErrorKind::ResourceCap => 3,
            ErrorKind::Verification => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HarnessError {
    pub kind: ErrorKind,
    pub message: String,
}

pub type HarnessResult<T> = Result<T, HarnessError>;

impl HarnessError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        HarnessError {
            kind: ErrorKind::InvalidConfig,
            message: msg.into(),
        }
    }

    pub fn verification(msg: impl Into<String>) -> Self {
        HarnessError {
            kind: ErrorKind::Verification,
            message: msg.into(),
        }
    }

    /// Prefixes the message with the setting that produced it.
    pub fn context(mut self, ctx: impl fmt::Display) -> Self {
        self.message = format!("{ctx}: {}", self.message);
        self
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for HarnessError {}

impl From<ffuniv::Error> for HarnessError {
    fn from(e: ffuniv::Error) -> Self {
        let kind = match e {
            ffuniv::Error::ResourceCap(_) => ErrorKind::ResourceCap,
            ffuniv::Error::Verification(_) | ffuniv::Error::Numerical(_) => ErrorKind::Verification,
            _ => ErrorKind::InvalidConfig,
        };
        HarnessError {
            kind,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::invalid(format!("i/o: {e}"))
    }
}
