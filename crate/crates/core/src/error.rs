use thiserror::Error;

/// Everything that can go wrong while building a design, estimating, or simulating.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("stratum `{stratum}`: {field} must be at least 1 (got {value})")]
    NonPositiveCount {
        stratum: String,
        field: &'static str,
        value: u64,
    },
    #[error("stratum `{stratum}`: population count N_h must be at least 2 (got {value})")]
    StratumTooSmall { stratum: String, value: u64 },
    #[error("stratum `{stratum}`: sample size {n} exceeds stratum size {population}")]
    SampleExceedsStratum {
        stratum: String,
        n: u64,
        population: u64,
    },
    #[error("stratum `{stratum}`: correlation {rho} is outside [-1, 1]")]
    CorrelationOutOfRange { stratum: String, rho: f64 },
    #[error("stratum `{stratum}`: {field} must be finite and non-negative (got {value})")]
    InvalidDispersion {
        stratum: String,
        field: &'static str,
        value: f64,
    },
    #[error("stratum `{stratum}`: {field} is not finite")]
    NonFiniteInput {
        stratum: String,
        field: &'static str,
    },
    #[error("stratum `{stratum}`: supplied covariance {supplied} disagrees with rho*sd_y*sd_x = {derived}")]
    InconsistentCovariance {
        stratum: String,
        supplied: f64,
        derived: f64,
    },
    #[error("stratum `{stratum}`: finite population correction override {value} is negative or not finite")]
    InvalidFpcOverride { stratum: String, value: f64 },
    #[error("duplicate stratum id `{0}`")]
    DuplicateStratum(String),
    #[error("a design needs at least one stratum")]
    EmptyDesign,
    #[error("stratum `{stratum}`: population mean of x is zero, ratio undefined")]
    ZeroAuxMean { stratum: String },
    #[error("stratum `{stratum}`: sample mean of x is zero")]
    ZeroSampleAuxMean { stratum: String },
    #[error("stratum `{stratum}`: estimator denominator is zero")]
    ZeroDenominator { stratum: String },
    #[error("stratum `{stratum}`: sample variance of x is zero, regression slope undefined")]
    DegenerateSlope { stratum: String },
    #[error("sample strata do not match design strata: {0}")]
    StrataMismatch(String),
    #[error("stratum `{stratum}`: estimator produced a non-finite value")]
    NonFiniteResult { stratum: String },
    #[error("stratum `{stratum}`: tuning constant a_h must be non-zero")]
    ZeroTuning { stratum: String },
    #[error("stratum `{stratum}`: S_yx is zero, no finite optimum for a_h")]
    UncorrelatedStratum { stratum: String },
    #[error("optimum lambda system is singular (4*P1*P2 - (2*P3 + 3*P4)^2 = {0})")]
    SingularSystem(f64),
    #[error("estimator `{0}` needs tuning parameters that were not supplied")]
    MissingTuning(&'static str),
    #[error("expected {expected} per-stratum values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid population spec: {0}")]
    InvalidSpec(String),
    #[error("enumeration would visit {0} samples, above the limit of {1}")]
    TooManySamples(u128, u128),
    #[error("lambda grid is empty or malformed: {0}")]
    EmptyRange(String),
    #[error("at least {min} replicates are required (got {got})")]
    TooFewReplicates { min: usize, got: usize },
    #[error("stratum `{stratum}` has a single unit, sample moments need at least two")]
    SingletonStratum { stratum: String },
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("line {line}{}: {message}", column.map(|c| format!(", column `{c}`")).unwrap_or_default())]
    MalformedRow {
        line: u64,
        column: Option<&'static str>,
        message: String,
    },
    #[error("line {line}{}: {source}", column.map(|c| format!(", column `{c}`")).unwrap_or_default())]
    InvariantViolation {
        line: u64,
        column: Option<&'static str>,
        #[source]
        source: Box<Error>,
    },
    #[error("unknown dataset `{name}` (available: {})", available.join(", "))]
    UnknownDataset {
        name: String,
        available: Vec<&'static str>,
    },
    #[error("unknown estimator `{0}` (expected one of mean, t1, t2, t3, t4, tlr, tR, tp)")]
    UnknownEstimator(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
