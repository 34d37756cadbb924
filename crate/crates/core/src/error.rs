use thiserror::Error;

use crate::carpet::Word;

#[derive(Debug, Error)]
pub enum CarpetError {
    #[error("invalid symbol {0}, expected 1..=8")]
    InvalidSymbol(u8),
    #[error("word of length {0} exceeds the supported maximum")]
    WordTooLong(usize),
    #[error("code {code} does not describe a word of length {len}")]
    InvalidWordCode { len: usize, code: u64 },
    #[error("cannot parse word {0:?}")]
    ParseWord(String),
    #[error("unknown symmetry {0:?}")]
    UnknownSymmetry(String),
    #[error("words have different lengths {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("intersection of cell {0} with itself is not defined")]
    SameCell(Word),
    #[error("point is not representable at denominator level {level}")]
    NotRepresentable { level: usize },
    #[error("point does not lie on the carpet")]
    NotInCarpet,
    #[error("points coincide")]
    CoincidentPoints,
    #[error("level {level} exceeds the vertex budget ({vertices} > {budget})")]
    BudgetExceeded {
        level: usize,
        vertices: u64,
        budget: u64,
    },
    #[error("invalid level: {0}")]
    InvalidLevel(String),
    #[error("vertex {0} is out of range")]
    VertexOutOfRange(u32),
    #[error("function is not aligned with the graph: {0}")]
    Misaligned(String),
    #[error("non-finite value at vertex {0}")]
    NonFinite(usize),
    #[error("exponent p = {0} must satisfy p > 1")]
    InvalidExponent(f64),
    #[error("invalid rescaling factor {0}")]
    InvalidRho(f64),
    #[error("infeasible constraints: {0}")]
    Infeasible(String),
    #[error("solver did not converge: {0}")]
    NotConverged(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("pasted copies disagree at vertex {0}")]
    GlueMismatch(u32),
    #[error("point is not a vertex of the graph")]
    NotAVertex,
    #[error("walk dimension {beta} does not exceed the Hausdorff dimension {alpha}")]
    SubcriticalWalkDimension { beta: f64, alpha: f64 },
}

pub type Result<T> = std::result::Result<T, CarpetError>;
