use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("primitive atom has no triple (generation {0})")]
    PrimitiveAtom(u32),
    #[error("not a valid atom triple: {0}")]
    InvalidTriple(String),
    #[error("root has no parent")]
    RootHasNoParent,
    #[error("edge only defined within one generation ({0} vs {1})")]
    GenerationMismatch(u32, u32),
    #[error("generation {gen} exceeds the cap of {cap}")]
    GenerationCap { gen: u32, cap: u32 },
    #[error("index {index} out of range for generation {gen}")]
    IndexOutOfRange { gen: u32, index: u64 },
    #[error("edge rank {rank} out of range (degree {degree})")]
    RankOutOfRange { rank: u64, degree: u64 },
    #[error("{0} is not an edge")]
    NotAnEdge(String),
    #[error("target generation {target} is above generation {gen}")]
    AncestorAbove { target: u32, gen: u32 },
    #[error("image knowledge vacuous below generation 2 (got generation {0})")]
    VacuousImage(u32),
    #[error("precision exhausted; refine first (depth {depth}, needs {needed})")]
    PrecisionExhausted { depth: usize, needed: usize },
    #[error("invalid point code: {0}")]
    InvalidPointCode(String),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("interior points required")]
    BoundaryPoint,
    #[error("invalid box configuration: {0}")]
    InvalidBoxes(String),
    #[error("{0}")]
    Falsified(String),
}

pub type Result<T> = std::result::Result<T, Error>;
