use std::fmt;
use std::path::Path;
use std::process::ExitCode;

/// A command failure and the exit status it maps to.
#[derive(Debug)]
pub enum Failure {
    /// The data violates the record contract (exit 1).
    Data(String),
    /// I/O, configuration or usage problems (exit 2).
    Setup(String),
}

impl Failure {
    pub fn setup(msg: impl Into<String>) -> Self {
        Failure::Setup(msg.into())
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Failure::Setup(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            Failure::Data(_) => ExitCode::from(1),
            Failure::Setup(_) => ExitCode::from(2),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Data(m) | Failure::Setup(m) => f.write_str(m),
        }
    }
}

impl From<whydiffer::Error> for Failure {
    fn from(e: whydiffer::Error) -> Self {
        if e.is_data_error() {
            Failure::Data(e.to_string())
        } else {
            Failure::Setup(e.to_string())
        }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Setup(e.to_string())
    }
}
