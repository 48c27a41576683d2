//! Error types shared across the crate.

use thiserror::Error;

use crate::retrieval::PipelineStage;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coordinate arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("coordinate {index} has the wrong kind for its factor")]
    CoordKindMismatch { index: usize },

    #[error("a group must have at least one factor")]
    EmptyGroup,

    #[error("cyclic factor order must be at least 1")]
    InvalidOrder,

    #[error("group is infinite where a finite group is required")]
    InfiniteGroup,

    #[error("subgroup closure is infinite")]
    InfiniteClosure,

    #[error("unsupported infinite subgroup shape")]
    UnsupportedInfiniteSubgroup,

    #[error("quotient is infinite")]
    InfiniteQuotient,

    #[error("evaluation on an infinite dual requires an explicit point list")]
    InfiniteDual,

    #[error("no chain member contains the requested set")]
    ChainExhausted,

    #[error("chain is not increasing")]
    ChainNotIncreasing,

    #[error("sample index set is not a section of the quotient")]
    NotASection,

    #[error("representatives are not in pairwise distinct cosets")]
    DuplicateCoset,

    #[error("spectrum set is empty")]
    EmptySpectrum,

    #[error("empty index or evaluation set: {0}")]
    EmptySet(&'static str),

    #[error("group mismatch between operands")]
    GroupMismatch,

    #[error("Haar weight mismatch between signals")]
    WeightMismatch,

    #[error("candidate pool exhausted at rank {rank} of {needed}")]
    PoolExhausted { rank: usize, needed: usize },

    #[error("enumeration exhausted after selecting {selected} of {requested} indices")]
    EnumerationExhausted { selected: usize, requested: usize },

    #[error(
        "rank-deficient linear system ({context}): rank {rank} of {needed}, condition {condition:e}"
    )]
    RankDeficient {
        context: String,
        rank: usize,
        needed: usize,
        condition: f64,
    },

    #[error("signal absent: assembled relation matrix is zero or has no positive eigenvalue")]
    SignalAbsent,

    #[error("zero signal where a nonzero signal is required")]
    ZeroSignal,

    #[error("invalid coefficient profile: {0}")]
    InvalidCoeffProfile(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("pipeline stage {stage}: {source}")]
    Pipeline {
        stage: PipelineStage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Tags an error with the pipeline stage it occurred in.
    pub(crate) fn at_stage(self, stage: PipelineStage) -> Error {
        Error::Pipeline {
            stage,
            source: Box::new(self),
        }
    }

    /// The stage tag, when this error was raised inside the retrieval pipeline.
    pub fn stage(&self) -> Option<PipelineStage> {
        match self {
            Error::Pipeline { stage, .. } => Some(*stage),
            _ => None,
        }
    }
}
