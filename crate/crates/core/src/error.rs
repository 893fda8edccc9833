use thiserror::Error;

use crate::processor::ProcessError;
use crate::processors::SpecError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown vertex index {0}")]
    UnknownVertex(usize),

    #[error("unknown vertex `{0}`")]
    UnknownVertexName(String),

    #[error("vertex {vertex} has no letter with symbol {symbol}")]
    UnknownLetter { vertex: usize, symbol: usize },

    #[error("letter index {0} is outside the alphabet")]
    LetterIndex(usize),

    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),

    #[error("duplicate edge `{0}`")]
    DuplicateEdge(String),

    #[error("edge `{edge}` references undeclared vertex `{vertex}`")]
    DanglingEdge { edge: String, vertex: String },

    #[error("vertex `{vertex}`: processor expects {processor} out-edges but the graph has {graph}")]
    DegreeMismatch {
        vertex: String,
        processor: usize,
        graph: usize,
    },

    #[error("vertex `{vertex}`: state {state} is not in the processor's state space")]
    InvalidState { vertex: String, state: String },

    #[error("shape mismatch: expected {expected} {what}, got {got}")]
    Shape {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("letter count overflow at letter index {0}")]
    Overflow(usize),

    #[error("input counts must be nonnegative (letter index {0} is negative)")]
    NegativeInput(usize),

    #[error("processor at vertex `{vertex}` failed: {source}")]
    Processor {
        vertex: String,
        #[source]
        source: ProcessError,
    },

    #[error("invalid processor at vertex `{vertex}`: {source}")]
    Spec {
        vertex: String,
        #[source]
        source: SpecError,
    },

    #[error("output vertex `{0}` may emit messages; collapsing requires silent outputs")]
    EmittingOutput(String),

    #[error("word is not complete: letter index {letter} has count {count} after execution")]
    NotComplete { letter: usize, count: i64 },

    #[error("no halting legal execution found: {0}")]
    NoHaltingRun(String),

    #[error("worker count must be at least 1")]
    NoWorkers,

    #[error("letter {0} is not at an interior vertex")]
    NotInterior(String),

    #[error("map is not nondecreasing: F({lower:?}) is not ≤ F({upper:?})")]
    NonMonotone { lower: Vec<u64>, upper: Vec<u64> },

    #[error("invalid program: {0}")]
    InvalidProgram(String),
}
