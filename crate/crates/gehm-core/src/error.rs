//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong while building graphs, evaluating operators,
/// integrating the system, or running experiments.
#[derive(Debug, Error)]
pub enum GehmError {
    /// A scalar argument is outside its admissible range (p < 1, dt <= 0, ...).
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Config-level failure; collects every problem found, not just the first.
    #[error("invalid configuration:\n{}", .issues.iter().map(|s| format!("  - {s}")).collect::<Vec<_>>().join("\n"))]
    Config { issues: Vec<String> },

    /// A vector argument has the wrong length or non-finite entries.
    #[error("invalid input: {0}")]
    Input(String),

    /// A graph file failed to parse; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Structural graph validation failed (ids out of range, asymmetric edges, ...).
    #[error("graph validation failed: {0}")]
    Validation(String),

    /// An iterative estimate did not stabilize and the caller required one.
    #[error("did not converge: {0}")]
    NonConvergence(String),

    /// Too few samples/snapshots to evaluate a diagnostic.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// The requested functional is undefined for this reaction form.
    #[error("unsupported reaction form: {0}")]
    UnsupportedForm(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
