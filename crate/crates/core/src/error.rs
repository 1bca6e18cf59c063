use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero vector has no primitive representative")]
    ZeroVector,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("cone is not strongly convex (contains a line)")]
    NotStronglyConvex,
    #[error("empty generator list")]
    EmptyCone,
    #[error("intersection not a face: cones {first} and {second}")]
    IntersectionNotFace { first: usize, second: usize },
    #[error("ray index {index} out of range ({count} rays)")]
    RayIndexOutOfRange { index: usize, count: usize },
    #[error("lattice point {0} lies outside the support of the fan")]
    OutsideSupport(String),
    #[error("lattice point {0} is already a ray of the fan")]
    AlreadyRay(String),
    #[error("fan is not complete")]
    NotComplete,
    #[error("fan is not pure of full dimension")]
    NotPure,
    #[error("divisor has {found} coefficients but the fan has {expected} rays")]
    CoefficientCount { expected: usize, found: usize },
    #[error("divisor is not Q-Cartier")]
    NotQCartier,
    #[error("divisor is not Cartier")]
    NotCartier,
    #[error("fan does not refine the base fan")]
    NotRefinement,
    #[error("fans are not birational (supports differ)")]
    NotBirational,
    #[error("pair is not log canonical")]
    NotLogCanonical,
    #[error("ray {0} does not carry boundary coefficient 1")]
    CoefficientNotOne(usize),
    #[error("not an extremal ray of the Mori cone")]
    NotExtremal,
    #[error("extremal ray is not (K+D)-negative")]
    NotNegative,
    #[error("divisor is not nef")]
    NotNef,
    #[error("divisor is not ample")]
    NotAmple,
    #[error("contraction is not a flipping contraction")]
    NotFlipping,
    #[error("no ample-model chamber: {0}")]
    NoAmpleChamber(String),
    #[error("the Mori cone is not strongly convex; no extremal rays to pick")]
    MoriConeNotPointed,
    #[error("MMP exceeded the step cap of {0}")]
    StepCapExceeded(usize),
    #[error("rounding of coefficient {0} is not determined by its interval")]
    AmbiguousRounding(usize),
    #[error("weight window holds {0} weights, over the guard limit")]
    WindowOverflow(u64),
    #[error("set of cones is not star closed")]
    NotStarClosed,
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("unknown example id `{0}`")]
    UnknownExample(String),
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}
