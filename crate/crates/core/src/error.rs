use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("lattice point (i={i}, j={j}) lies outside the grid for n_q={n_q}")]
    OutOfRange { i: u64, j: u64, n_q: u32 },

    #[error("point (i={i}, j={j}) with garbage bit {bit} is not in the image of the forward map")]
    NotInImage { i: u32, j: u32, bit: u8 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("layout error: {0}")]
    Layout(String),

    #[error("backend error: {0}")]
    Backend(String),

    #[error(
        "dense state of {qubits} qubits needs {bytes} bytes, above the budget of {budget} qubits"
    )]
    OverBudget { qubits: usize, budget: usize, bytes: u128 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("target fidelity {target} not reached with M up to {cap} (best mean {best:.6})")]
    CappedSearch { target: f64, cap: u64, best: f64 },

    #[error("illegal pebble plan at move {index}: {reason}")]
    IllegalPlan { index: usize, reason: String },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
