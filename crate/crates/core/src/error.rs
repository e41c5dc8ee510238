use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("graph contains a cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error("duplicate vertex label {0:?}")]
    DuplicateVertex(String),
    #[error("duplicate edge id {0:?}")]
    DuplicateEdge(String),
    #[error("edge {edge:?} refers to undeclared vertex {vertex:?}")]
    DanglingEndpoint { edge: String, vertex: String },
    #[error("invalid label {label:?}: {reason}")]
    InvalidLabel { label: String, reason: &'static str },
    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("unknown edge {0:?}")]
    UnknownEdge(String),
    #[error("more than {cap} directed paths")]
    CapExceeded { cap: usize },
    #[error("vertex {0:?} has zero strength")]
    ZeroStrength(String),
    #[error("projection kernel is not normalized at vertex {0:?}")]
    KernelNotNormalized(String),
    #[error("not a bijection: {0}")]
    NotABijection(String),
    #[error("operands live on different graphs")]
    BaseMismatch,
    #[error("vertex set is not ancestrally closed: {0:?} has an ancestor outside it")]
    NotAncestrallyClosed(String),
    #[error("vertex {0:?} is not weak")]
    NotWeak(String),
    #[error("vertex {0:?} is a root")]
    RootInSet(String),
    #[error("projection would create more than {cap} edges")]
    ProjectionBlowup { cap: usize },
    #[error("{n} players exceeds the limit of {max}")]
    TooManyPlayers { n: usize, max: usize },
    #[error("more than {cap} maximal chains")]
    ChainExplosion { cap: usize },
    #[error("{what} of size {n} exceeds the limit of {max}")]
    TooLarge { what: &'static str, n: usize, max: usize },
    #[error("cover pair ({0:?}, {1:?}) is implied by the other pairs")]
    NotACoverRelation(String, String),
    #[error("poset has no unique bottom element {0:?}")]
    NoUniqueBottom(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("value shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },
    #[error("missing weight for {0:?}")]
    MissingWeight(String),
    #[error("missing value for vertex {0:?}")]
    MissingValue(String),
    #[error("vertex {0:?} is not a root")]
    NotARoot(String),
    #[error("invalid rational {0:?}")]
    ParseRational(String),
    #[error("oracle disagreement for {0:?}")]
    OracleDisagreement(String),
    #[error("graph is not a power set over its roots")]
    NotAPowerSet,
}
