use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Validation(_) => 2,
            Self::Numerical(_) => 3,
            Self::Io(_) => 1,
        }
    }
}

impl From<atomtrap::Error> for CliError {
    fn from(e: atomtrap::Error) -> Self {
        match e {
            atomtrap::Error::InvalidInput { .. } | atomtrap::Error::MissingCoupling(_) | atomtrap::Error::LineData(_) => {
                Self::Validation(vec![e.to_string()])
            }
            other => Self::Numerical(other.to_string()),
        }
    }
}
