use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point lies on the hole of a degenerate Möbius map")]
    HoleEvaluation,
    #[error("sequence is not Cauchy (last step {0:.3e})")]
    NotCauchy(f64),
    #[error("triple is not separated enough for a Möbius fit")]
    DegenerateTriple,
    #[error("floating gcd estimates disagree: clustering gives {clustered}, Sylvester rank gives {sylvester}")]
    RankAmbiguity { clustered: usize, sylvester: usize },
    #[error("composition is indeterminate: constant reduction lands on a hole")]
    Indeterminate,
    #[error("exact coefficients exceeded the bit-size cap")]
    CoefficientOverflow,
    #[error("root finder failed to converge")]
    RootFindingDiverged,
    #[error("prediction not reached within the provided sequence")]
    InconclusiveK,
    #[error("measure charges the hole of a degenerate Möbius map")]
    HoleMass,
    #[error("map is not degenerate")]
    NotDegenerate,
    #[error("measure charges the exceptional set")]
    ExceptionalMass,
    #[error("measure has an atom of weight at least 1/2")]
    NotInM1o,
    #[error("barycenter iteration did not converge")]
    NoConvergence,
    #[error("family degenerates at a scheduled parameter")]
    SpecializationDegenerate,
    #[error("no admissible post-scaling found")]
    ScalingFailed,
    #[error("level {level} limit is not Cauchy (error {error:.3e})")]
    LevelNotCauchy { level: usize, error: f64 },
    #[error("depth ratio sequence is not monotone")]
    NonMonotone,
    #[error("growth case cannot be decided from the available levels")]
    CaseUndetermined,
    #[error("hypothesis not met: {0}")]
    HypothesisUnmet(String),
    #[error("scalings {0} and {1} are not independent")]
    NotIndependent(usize, usize),
    #[error("gluing graph is not a tree: {0}")]
    NotATree(String),
    #[error("continuity fails between spheres {0} and {1}")]
    ContinuityFailure(usize, usize),
    #[error("critical multiplicities do not add up: {0}")]
    CriticalCountMismatch(String),
    #[error("inner domain is not compactly contained")]
    ContainmentFailed,
    #[error("argument principle degree {found}, expected {expected}")]
    DegreeMismatch { found: i64, expected: i64 },
    #[error("sequence does not converge")]
    NotConverging,
    #[error("invalid input: {0}")]
    Schema(String),
}

/// Coarse classes used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Schema,
    Numerical,
    Hypothesis,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            Schema(_) => ErrorClass::Schema,
            HypothesisUnmet(_) | Indeterminate | ExceptionalMass | NotInM1o | HoleMass
            | HoleEvaluation | NotDegenerate | DegenerateTriple | SpecializationDegenerate
            | NotIndependent(..) => ErrorClass::Hypothesis,
            _ => ErrorClass::Numerical,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
