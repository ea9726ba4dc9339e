use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SyntaxError {
    #[error("signature error: {0}")]
    Signature(String),
    #[error("arity mismatch for `{name}`: expected {expected}, found {found}")]
    Arity { name: String, expected: usize, found: usize },
    #[error("malformed expression: {0}")]
    Malformed(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("{line}:{column}: {message}")]
    Parse { line: usize, column: usize, message: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("carrier must be nonempty")]
    EmptyCarrier,
    #[error("constant c{0} is outside the carrier")]
    OutsideCarrier(u32),
    #[error("table for `{symbol}`: {message}")]
    Table { symbol: String, message: String },
    #[error("expression is not a sentence: {0}")]
    NotSentence(String),
    #[error("expected a variable-free atom")]
    NotAtomic,
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GridError {
    #[error("rank {rank} out of range for level {level} (limit {limit})")]
    RankOutOfRange { level: usize, rank: u64, limit: u64 },
    #[error("a_{0} overflows")]
    Overflow(usize),
    #[error("grid row {0} has not been built")]
    RowMissing(usize),
    #[error("only {available} formulas enumerated, row {row} needs psi_{row}")]
    NotEnoughFormulas { row: usize, available: usize },
    #[error("sequence is not strictly increasing: {0:?}")]
    NotIncreasing(Vec<usize>),
    #[error("F_{n} has code not exceeding {n}")]
    CodeTooSmall { n: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("seed assignment conflicts with A_M at code {0}")]
    InconsistentSeed(usize),
    #[error("no node of length {length}: every sign vector failed ({clause})")]
    NoNode { length: usize, clause: String },
    #[error("A_M refuted at the proof bound")]
    InconsistentAxioms,
    #[error("search budget exhausted at length {0}")]
    BudgetExhausted(usize),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("step {step}: {reason}")]
pub struct DerivationDefect {
    pub step: usize,
    pub reason: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OmegaError {
    #[error("the quantifier carrier must be nonempty")]
    EmptyCarrier,
    #[error("{0} must be positive")]
    ZeroBound(&'static str),
    #[error("level {n} exceeds the cap {cap}")]
    LevelAboveCap { n: usize, cap: usize },
    #[error("formula must be {0}")]
    Shape(&'static str),
}
