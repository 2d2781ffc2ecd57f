use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid Pauli symbol {symbol:?} at position {position}")]
    InvalidSymbol { position: usize, symbol: char },

    #[error("empty Pauli string")]
    EmptyPauli,

    #[error("qubit count {0} outside supported range 1..={max}", max = crate::pauli::MAX_QUBITS)]
    UnsupportedQubitCount(usize),

    #[error("size mismatch: {left} vs {right} qubits")]
    SizeMismatch { left: usize, right: usize },

    #[error("qubit index {index} out of range for {n} qubits")]
    QubitOutOfRange { index: usize, n: usize },

    #[error("family parameter r = {0} is not supported (need r >= 2)")]
    InvalidFamilyParameter(usize),

    #[error("generators {0} and {1} do not commute")]
    NonCommuting(usize, usize),

    #[error("generators are linearly dependent (rank {rank} < {count})")]
    DependentGenerators { rank: usize, count: usize },

    #[error("enumeration of {patterns} patterns exceeds the budget of {budget}")]
    BudgetExceeded { patterns: u128, budget: u128 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not a constant-excitation code of this family: {0}")]
    NotConstantExcitation(String),

    #[error("code does not correct weight-1 errors: {first} and {second} share a syndrome")]
    NotWeightOneCorrecting { first: String, second: String },

    #[error("construction check failed: {0}")]
    ConstructionCheck(String),

    #[error("dense simulation limited to {max} qubits, got {n}", max = crate::state::MAX_DENSE_QUBITS)]
    TooManyQubits { n: usize },

    #[error("input state is not normalized (squared norm {0})")]
    Unnormalized(f64),

    #[error("measurement branch has zero norm")]
    ZeroNormBranch,

    #[error("malformed code file, line {line}: {message}")]
    CodeFile { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
