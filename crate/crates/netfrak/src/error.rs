use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("segment {0} has zero length")]
    ZeroLengthSegment(usize),
    #[error("network is not connected")]
    Disconnected,
    #[error("segments {0} and {1} cross away from shared vertices")]
    CrossingSegments(usize, usize),
    #[error("duplicate segment between vertices {0} and {1}")]
    DuplicateSegment(usize, usize),
    #[error("segment index {0} out of range")]
    SegmentOutOfRange(usize),
    #[error("vertex index {0} out of range")]
    VertexOutOfRange(usize),
    #[error("network has no segments")]
    EmptyNetwork,
    #[error("offset {offset} outside segment {segment} of length {length}")]
    OffsetOutOfRange {
        segment: usize,
        offset: f64,
        length: f64,
    },
    #[error("point ({0}, {1}) is farther than {2} from the network")]
    TooFarFromNetwork(f64, f64, f64),
    #[error("grid spacing {0} is not in (0, |L|)")]
    BadSpacing(f64),
    #[error("pattern points {0} and {1} closer than the simplicity tolerance")]
    NotSimple(usize, usize),

    #[error("geodesic ball boundary is empty at r = {0}")]
    EmptyBallBoundary(f64),

    #[error("need at least two points for a bandwidth rule, got {0}")]
    TooFewPoints(usize),
    #[error("bandwidth {0} is not positive and finite")]
    BadBandwidth(f64),
    #[error("intensity surface fitted to an empty pattern")]
    EmptySurface,
    #[error("non-positive intensity estimate at data point {0}")]
    NonPositiveIntensityAtDataPoint(usize),

    #[error("evaluation grid is empty")]
    EmptyGrid,
    #[error("r grids of the two estimates do not match")]
    GridMismatch,
    #[error("r grid maximum {rmax} is not below the valid range bound R = {r_bound}")]
    RMaxExceedsR { rmax: f64, r_bound: f64 },

    #[error("dominating intensity {rho_max} exceeded: rho({x}, {y}) = {rho}")]
    BadDominating {
        rho: f64,
        rho_max: f64,
        x: f64,
        y: f64,
    },
    #[error("random field has {0} cells, above the dense factorization bound {1}")]
    FieldTooLarge(usize, usize),
    #[error("covariance matrix not positive definite after jitter escalation")]
    CovarianceNotPD,

    #[error("curve has no defined values")]
    AllUndefined,
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
