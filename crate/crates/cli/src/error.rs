use std::fmt;

/// Failures, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    /// A verification or consistency check failed. The report is still printed.
    CheckFailed { message: String, report: String },
    Usage(String),
    /// Input is valid but outside what the reduction accepts.
    Refusal { message: String, report: String },
    Capacity(String),
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::CheckFailed { .. } => 1,
            CliError::Usage(_) => 2,
            CliError::Refusal { .. } => 3,
            CliError::Capacity(_) => 4,
            CliError::Input(_) => 5,
        }
    }

    pub fn report(&self) -> Option<&str> {
        match self {
            CliError::CheckFailed { report, .. } | CliError::Refusal { report, .. } => Some(report),
            _ => None,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::CheckFailed { message, .. } => write!(f, "check failed: {message}"),
            CliError::Usage(m) => write!(f, "invalid arguments: {m}"),
            CliError::Refusal { message, .. } => write!(f, "refusing: {message}"),
            CliError::Capacity(m) => write!(f, "capacity: {m}"),
            CliError::Input(m) => write!(f, "input error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

pub fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}
