use thiserror::Error;

/// Errors reported by construction, parsing and evaluation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("operator size mismatch: {0} vs {1} qubits")]
    DimensionMismatch(usize, usize),

    #[error("qubit count {0} exceeds the {1}-qubit limit")]
    TooManyQubits(usize, usize),

    #[error("qubit index {0} out of range for {1} qubits")]
    QubitOutOfRange(usize, usize),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid operator text {text:?}: {message}")]
    BadOperatorText { text: String, message: String },

    #[error("operator is not Hermitian: {0}")]
    NotHermitian(String),

    #[error("vertex {vertex} is not a neighbour of vertex {anchor}")]
    NotANeighbour { anchor: usize, vertex: usize },

    #[error("vertices {0} and {1} are adjacent, so the chosen set is not independent")]
    NotIndependent(usize, usize),

    #[error("vertices {0}, {1}, {2} do not form a triangle")]
    NotATriangle(usize, usize, usize),

    #[error("invalid construction: {0}")]
    Construction(String),

    #[error("qubit {qubit} carries conflicting letters across the combined parts")]
    IncompatibleParts { qubit: usize },

    #[error("conditioned vertex {vertex} carries {letter} in some term; only Z or identity allowed")]
    ConditionedVertexNotDiagonal { vertex: usize, letter: char },

    #[error("classical bound is zero; violation ratio undefined")]
    ZeroClassicalBound,

    #[error("term {term} is not a +1 stabilizer element of the declared graph")]
    NotAStabilizerSum { term: String },

    #[error("expression has non-integer coefficients; exact saturation is undefined")]
    NonIntegerCoefficients,

    #[error("problem size {0} exceeds the enumeration/decomposition cap {1}")]
    ResourceCap(usize, usize),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by a problem too large for the configured caps,
    /// as opposed to invalid input.
    pub fn is_resource_cap(&self) -> bool {
        matches!(self, Error::ResourceCap(_, _) | Error::TooManyQubits(_, _))
    }
}
