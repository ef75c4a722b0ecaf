use thiserror::Error;

/// Errors surfaced by the simulation modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed capacity law: {0}")]
    MalformedLaw(String),

    #[error("region has {edges} edges, exceeding the budget of {budget}")]
    RegionTooLarge { edges: usize, budget: usize },

    #[error("degenerate convex body: {0}")]
    DegenerateBody(String),

    #[error("polytope is unbounded or empty")]
    UnboundedPolytope,

    #[error("dilated body contains no lattice point")]
    EmptyDiscretization,

    #[error("degenerate cylinder discretization: {0}")]
    DegenerateCylinder(String),

    #[error("Wulff crystal intersection is empty")]
    EmptyCrystal,

    #[error("flow value exceeds representable range")]
    OverflowGuard,

    #[error("instance too large for exhaustive search ({0} edges)")]
    TooLarge(usize),

    #[error("truncation schedule exhausted without stabilization; trace: {trace:?}")]
    NoStabilization { trace: Vec<(f64, f64)> },

    #[error("glued edge set does not separate; escape path of {} vertices", witness.len())]
    NotSeparating { witness: Vec<[i64; 3]> },

    #[error("no flow-constant estimate for face normal {0:?}")]
    MissingDirection([f64; 3]),

    #[error("unsupported dimension {0}; exact lattice support covers d in {{2, 3}}")]
    UnsupportedDimension(usize),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
