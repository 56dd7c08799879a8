use thiserror::Error;

use crate::model::{Diagnostic, VarId};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid diagram: {}", summarize(.0))]
    Semantic(Vec<Diagnostic>),

    #[error("unknown-decision: {0} is not a decision node")]
    UnknownDecision(VarId),

    #[error("unknown-variable: {0} is not in the table domain")]
    UnknownVariable(VarId),

    #[error("table shape mismatch: expected {expected} cells, found {found}")]
    Shape { expected: usize, found: usize },

    #[error("duplicate variable {0} in table domain")]
    DuplicateVariable(VarId),

    #[error("divide-nonzero-by-zero at cell {cell}")]
    DivideByZero { cell: usize },

    #[error("divide-nonzero-by-zero on separator {separator:?} of edge {edge}")]
    SeparatorDivision { edge: usize, separator: Vec<VarId> },

    #[error("not-chordal: elimination order is not perfect at vertex {0}")]
    NotChordal(usize),

    #[error("no-qualifying-clique: no clique contains the domain of {0}")]
    NoQualifyingClique(String),

    #[error("missing-inbound-message: clique {from} has not sent to clique {to}")]
    MissingInboundMessage { from: usize, to: usize },

    #[error("missing-policy: the strategy has no policy for decision {0}")]
    MissingPolicy(VarId),

    #[error("not-soluble: decision {0} is not extremal under the declared temporal order")]
    NotSoluble(VarId),

    #[error("hugin-cannot-retract: the HUGIN architecture cannot retract policies")]
    HuginCannotRetract,

    #[error("SPU did not converge within {0} cycles")]
    NoConvergence(usize),

    #[error("too-large: {what} would need {size} entries (cap {cap})")]
    TooLarge {
        what: &'static str,
        size: u128,
        cap: u128,
    },

    #[error("infeasible generator parameters: {0}")]
    Infeasible(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn summarize(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
