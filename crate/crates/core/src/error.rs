//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by dataset ingestion, model fitting, similarity search,
/// and the evaluation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("missing header row")]
    MissingHeader,

    #[error("empty attribute name in header at column {column}")]
    EmptyHeaderName { column: usize },

    #[error("duplicate header name `{name}` at column {column}")]
    DuplicateHeader { name: String, column: usize },

    #[error("unknown target attribute `{name}`")]
    UnknownTarget { name: String },

    #[error("ragged row at line {line}: expected {expected} cells, found {found}")]
    RaggedRow {
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("non-binary value `{value}` at line {line}, column {column}")]
    NonBinaryValue {
        value: String,
        line: u64,
        column: usize,
    },

    #[error("empty case_id at line {line}")]
    EmptyCaseId { line: u64 },

    #[error("duplicate case_id `{id}`")]
    DuplicateCaseId { id: String },

    #[error("malformed label `{value}` at line {line}: expected `anomalous` or `normal`")]
    MalformedLabel { value: String, line: u64 },

    #[error("record has {found} values but schema has arity {expected}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("schema has no target attribute index {index} (arity {arity})")]
    TargetIndexOutOfRange { index: usize, arity: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("target attribute is constant; both target values are required")]
    ConstantTarget,

    #[error("vector dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("need {needed} candidate records, only {available} available")]
    NotEnoughRecords { needed: usize, available: usize },

    #[error("structure parse error at line {line}: {message}")]
    StructureParse { line: usize, message: String },

    #[error("structure is cyclic")]
    CyclicStructure,

    #[error("invalid structure: {message}")]
    InvalidStructure { message: String },

    #[error("model kind `learned_bbn` requires a fixed structure")]
    MissingStructure,

    #[error("eval case `{case_id}` has no gold label")]
    UnlabeledEvalCase { case_id: String },

    #[error("eval case `{case_id}` not found in repository")]
    EvalCaseNotInRepository { case_id: String },

    #[error("eval case without case_id cannot be matched to the repository")]
    MissingCaseId,

    #[error("scores contain only one class; need both anomalous and normal labels")]
    SingleClassScores,

    #[error("scores contain no anomalous labels")]
    NoPositiveLabels,

    #[error("only {available} records qualify for injection, {needed} required")]
    InsufficientHighConfidence { needed: usize, available: usize },

    #[error("invalid parameter: {message}")]
    InvalidParameter { message: String },

    #[error("denominator is zero")]
    ZeroDenominator,

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
