use std::fmt;

/// A single problem found while reading a configuration document.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    /// 1-based line number, `None` when the problem is not tied to a line.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

fn join_issues(issues: &[ConfigIssue]) -> String {
    issues
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid user-supplied parameters (truncation, modes, couplings, presets).
    #[error("configuration error: {0}")]
    Config(String),

    /// Every problem found in a configuration document, in line order.
    #[error("{} configuration error(s):\n{}", .0.len(), join_issues(.0))]
    ConfigDocument(Vec<ConfigIssue>),

    /// Inconsistent internal state, e.g. operators from different bases.
    #[error("internal error: {0}")]
    Internal(String),

    /// An observable was requested in a way that cannot be meaningful.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("steady-state solver failed: {message}")]
    Solver {
        message: String,
        /// Estimated dimension of the generator kernel, when it could be computed.
        kernel_dimension: Option<usize>,
    },

    #[error("integrator error: {0}")]
    Integrator(String),

    #[error("amplitude oracle error: {0}")]
    Oracle(String),

    #[error("adiabatic elimination error: {0}")]
    Elimination(String),

    #[error("g2(0) undefined: output population {population:e} is below {threshold:e}")]
    UndefinedCorrelation { population: f64, threshold: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
