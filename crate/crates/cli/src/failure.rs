use std::fmt;

/// A failed invocation; the variant selects the exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or unreadable input (exit code 2).
    Input(String),
    /// A numerical breakdown during computation (exit code 3).
    Numeric(String),
    /// `boundary-check` found violations (exit code 1).
    Check(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Numeric(_) => 3,
            Failure::Check(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) | Failure::Numeric(m) | Failure::Check(m) => f.write_str(m),
        }
    }
}

impl From<covthresh::Error> for Failure {
    fn from(e: covthresh::Error) -> Self {
        if e.is_numeric() {
            Failure::Numeric(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}
