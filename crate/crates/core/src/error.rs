use thiserror::Error;

/// Every failure the library can report.
///
/// Variants are grouped by the module that raises them. The FFI crate maps
/// each variant onto a stable integer code through [`Error::code`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    // spectral
    #[error("matrix has an eigenvalue of modulus {modulus} on the unit circle")]
    EigenvalueOnUnitCircle { modulus: f64 },
    #[error("matrix is not diagonalizable over the complex numbers")]
    NotDiagonalizable,
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("matrix is malformed: {0}")]
    MalformedMatrix(String),
    #[error("d^k = {d}^({num}/{den}) is not an integer")]
    NonIntegralDeterminantPower { d: u64, num: i64, den: i64 },
    #[error("requested eigen-block is empty")]
    EmptyBlock,
    #[error("orthogonal part has an unpaired -1 eigenvalue; P^{0} is not real")]
    NonRealPower(f64),
    #[error("integer overflow in exact arithmetic")]
    Overflow,

    // spaces / horoprod
    #[error("branching numbers differ: {0} vs {1}")]
    BranchingMismatch(u32, u32),
    #[error("horofunction has not stabilized at truncation height {0}")]
    TruncationTooSmall(i64),
    #[error("points lie at different heights: {0} vs {1}")]
    HeightMismatch(f64, f64),
    #[error("height constraint h1 + h2 = 0 violated: {0} + {1}")]
    HeightConstraintViolated(f64, f64),
    #[error("malformed coordinates: {0}")]
    MalformedCoordinates(String),
    #[error("distance exceeds the search radius {0}")]
    RadiusExceeded(u32),

    // boundary
    #[error("difference vanishes on the precision window; equality is not provable")]
    PrecisionExhausted,
    #[error("m-adic bases differ: {0} vs {1}")]
    BaseMismatch(u32, u32),
    #[error("block structures differ")]
    BlockMismatch,
    #[error("geodesics share no finite divergence height")]
    NotComparable,

    // groups
    #[error("tree address depth exceeds the bound {0}")]
    DepthExceeded(usize),
    #[error("relation {relation} violated with deviation {deviation}")]
    RelationViolated { relation: String, deviation: f64 },
    #[error("search budget exceeded; best residual {0}")]
    SearchBudgetExceeded(f64),
    #[error("group parameters differ")]
    GroupMismatch,

    // qimaps
    #[error("two samples have zero domain distance")]
    DegenerateSamples,
    #[error("map height displacement varies by {0}, beyond the declared bound")]
    NotHeightRespecting(f64),
    #[error("sampled maps have different domains")]
    DomainMismatch,
    #[error("family member is not a bounded perturbation of the identity")]
    NotBoundedPerturbation,

    // modelcount
    #[error("{0} is a proper power; reduce to its primitive base first")]
    ProperPowerBase(u64),

    // parsing / cli
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable numeric code, used by the C ABI.
    pub fn code(&self) -> i32 {
        match self {
            Error::EigenvalueOnUnitCircle { .. } => 1,
            Error::NotDiagonalizable => 2,
            Error::SingularMatrix => 3,
            Error::MalformedMatrix(_) => 4,
            Error::NonIntegralDeterminantPower { .. } => 5,
            Error::EmptyBlock => 6,
            Error::NonRealPower(_) => 7,
            Error::Overflow => 8,
            Error::BranchingMismatch(..) => 10,
            Error::TruncationTooSmall(_) => 11,
            Error::HeightMismatch(..) => 12,
            Error::HeightConstraintViolated(..) => 13,
            Error::MalformedCoordinates(_) => 14,
            Error::RadiusExceeded(_) => 15,
            Error::PrecisionExhausted => 20,
            Error::BaseMismatch(..) => 21,
            Error::BlockMismatch => 22,
            Error::NotComparable => 23,
            Error::DepthExceeded(_) => 30,
            Error::RelationViolated { .. } => 31,
            Error::SearchBudgetExceeded(_) => 32,
            Error::GroupMismatch => 33,
            Error::DegenerateSamples => 40,
            Error::NotHeightRespecting(_) => 41,
            Error::DomainMismatch => 42,
            Error::NotBoundedPerturbation => 43,
            Error::ProperPowerBase(_) => 50,
            Error::Parse(_) => 60,
            Error::InvalidArgument(_) => 61,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
