//! Configuration parsing, run orchestration, and bit-exact serialization for
//! the membrane solver CLI.

pub mod artifacts;
pub mod config;
pub mod report;
pub mod run;

/// Failure classes mapped onto process exit codes: configuration errors
/// exit 2, invariant violations exit 1, convergence failures exit 3.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Invariant(String),
    Convergence(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Invariant(msg) => write!(f, "invariant violation: {msg}"),
            CliError::Convergence(msg) => write!(f, "convergence failure: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invariant(_) => 1,
            CliError::Config(_) => 2,
            CliError::Convergence(_) => 3,
        }
    }
}

pub(crate) fn from_core(e: membrane_core::Error) -> CliError {
    use membrane_core::Error as E;
    match e {
        E::NoConvergence { .. }
        | E::InnerSolveStalled { .. }
        | E::BracketNotFound { .. }
        | E::BisectionStalled { .. }
        | E::AllRestartsFailed { .. } => CliError::Convergence(e.to_string()),
        E::NestingViolation { .. } | E::NonPerron { .. } => CliError::Invariant(e.to_string()),
        _ => CliError::Config(e.to_string()),
    }
}

pub type CliResult<T> = Result<T, CliError>;
