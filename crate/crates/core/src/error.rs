use thiserror::Error;

/// Errors surfaced by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("layout schema: {0}")]
    Schema(String),
    #[error("layout invariant violated by {electrode}: {reason}")]
    Geometry { electrode: String, reason: String },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },
    #[error("point {point:?} is {reason}")]
    BadPoint { point: [f64; 3], reason: String },
    #[error("no convergence in {what} after {iterations} iterations")]
    NoConvergence { what: String, iterations: usize },
    #[error("stationary point is not a minimum: {0}")]
    NotMinimum(String),
    #[error("unstable axis {axis}: curvature {curvature:e}")]
    Unstable { axis: String, curvature: f64 },
    #[error("drive at {drive_hz} Hz is within the guard band of transition {transition} at {resonance_hz} Hz")]
    Resonance { transition: String, drive_hz: f64, resonance_hz: f64 },
    #[error("rank-deficient sample geometry: {0}")]
    RankDeficient(String),
    #[error("shift coefficient {0:e} Hz/T² is below the numerical noise floor")]
    NoiseFloor(f64),
    #[error("flat field landscape: gradient {0:e} T/m")]
    FlatLandscape(f64),
    #[error("{file}:{line}: {reason}")]
    Parse { file: String, line: usize, reason: String },
    #[error("thermal: {0}")]
    Thermal(String),
    #[error("workflow: {0}")]
    Workflow(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Schema(_) => "schema",
            Error::Geometry { .. } => "geometry",
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::BadPoint { .. } => "bad_point",
            Error::NoConvergence { .. } => "no_convergence",
            Error::NotMinimum(_) => "not_minimum",
            Error::Unstable { .. } => "unstable",
            Error::Resonance { .. } => "resonance",
            Error::RankDeficient(_) => "rank_deficient",
            Error::NoiseFloor(_) => "noise_floor",
            Error::FlatLandscape(_) => "flat_landscape",
            Error::Parse { .. } => "parse",
            Error::Thermal(_) => "thermal",
            Error::Workflow(_) => "workflow",
            Error::Io(_) => "io",
        }
    }
}

pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name: name.to_string(), reason: reason.into() }
}
