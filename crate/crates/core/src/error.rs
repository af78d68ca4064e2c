use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("substitution produced a zero denominator")]
    ZeroDenominator,
    #[error("jet order {order} exceeds the prolongation cap {cap}")]
    ProlongationCap { order: usize, cap: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("slot {slot} out of range 1..={max}")]
    SlotOutOfRange { slot: usize, max: usize },
    #[error("mismatched levels: {0} vs {1}")]
    MismatchedLevel(usize, usize),
    #[error("degree mismatch: {0}")]
    Degree(String),
    #[error("expression is not polynomial: {0}")]
    NonPolynomial(String),
    #[error("ansatz has {size} unknowns, cap is {cap}")]
    AnsatzOverflow { size: usize, cap: usize },
    #[error("undeclared target generator: {0}")]
    UndeclaredGenerator(String),
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("malformed input at line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("verification failed: {0}")]
    Verification(String),
}
