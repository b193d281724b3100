use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("region has {size} sites, enumeration is capped at {cap}")]
    RegionTooLarge { size: usize, cap: usize },
    #[error("target set is unreachable inside the search window")]
    TargetUnreachable,
    #[error("invalid annulus: inner radius {r} must be at least 1 and below outer radius {big_r}")]
    InvalidAnnulus { r: f64, big_r: f64 },
    #[error("external boundary of B({big_r}) is not monochromatic blue")]
    MissingBoundaryCondition { big_r: f64 },
    #[error("no blue circuit found in dyadic annuli {first}..{last}")]
    SearchCapExceeded { first: u32, last: u32 },
    #[error("lambda = {0} lies outside the domain (-inf, 5/48)")]
    DomainError(f64),
    #[error("series did not converge within {terms} terms at x = {x}")]
    ConvergenceError { x: f64, terms: usize },
    #[error("renewal path reaches {covered} but {needed} is required")]
    PathTooShort { covered: f64, needed: f64 },
    #[error("need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("histogram is empty")]
    EmptyHistogram,
    #[error("region touches the search window boundary")]
    WindowOverflow,
    #[error("origin is not inside the traced boundary")]
    OriginNotInside,
    #[error("fewer than {0} yellow circuits surround the origin inside the window")]
    CircuitNotFound(u32),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid experiment spec field `{field}`: {reason}")]
    InvalidSpec { field: String, reason: String },
    #[error("parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
