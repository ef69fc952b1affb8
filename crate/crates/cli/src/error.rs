use std::fmt;
use std::process::ExitCode;

/// Failure classes of the command-line tool, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad flag value or configuration key.
    Config(String),
    /// `--config` names a file that cannot be read.
    MissingConfig(String),
    /// The simulation or computation itself failed.
    Run(fama_core::Error),
    /// The oracle suite reported failures.
    ValidationFailed(Vec<&'static str>),
    /// Results could not be written.
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Config(_) => 2,
            CliError::MissingConfig(_) => 3,
            CliError::Run(_) => 4,
            CliError::ValidationFailed(_) => 5,
            CliError::Output(_) => 6,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "{m}"),
            CliError::MissingConfig(m) => write!(f, "{m}"),
            CliError::Run(e) => write!(f, "run failed: {e}"),
            CliError::ValidationFailed(names) => write!(f, "failed checks: {}", names.join(", ")),
            CliError::Output(m) => write!(f, "cannot write output: {m}"),
        }
    }
}

impl From<fama_core::Error> for CliError {
    fn from(e: fama_core::Error) -> Self {
        match e {
            fama_core::Error::Config(m) | fama_core::Error::Domain(m) => CliError::Config(m),
            fama_core::Error::Output(m) => CliError::Output(m),
            other => CliError::Run(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}
