use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("site-count mismatch: {left} vs {right}")]
    SiteMismatch { left: usize, right: usize },

    #[error("cannot parse Pauli string {input:?}: {reason}")]
    Parse { input: String, reason: String },

    #[error("invalid bounds: {0}")]
    InvalidBounds(String),

    #[error("resource limit: {what} needs {sites} sites, limit is {limit}")]
    ResourceLimit {
        what: &'static str,
        sites: usize,
        limit: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("Kossakowski matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("superoperator tags do not match: {0}")]
    TagMismatch(String),

    #[error("Hamiltonian term {term} has weight {weight}, expected 2")]
    NonLocalTerm { term: String, weight: usize },

    #[error("weights {k} and {m} share the unperturbed eigenvalue; second-order formula is singular")]
    Degenerate { k: usize, m: usize },

    #[error("weights {0} and {1} are not adjacent")]
    NotAdjacent(usize, usize),

    #[error("eigensolver failed on {rows}x{rows} matrix (fingerprint {fingerprint:016x})")]
    Eigensolver { rows: usize, fingerprint: u64 },

    #[error("spectrum is not diagonalizable (biorthogonality residual {residual:e})")]
    NotDiagonalizable { residual: f64 },

    #[error("spectrum carries no eigenmodes")]
    NoModes,

    #[error("too few eigenvalues: {found} after filtering, need at least {needed}")]
    TooFewEigenvalues { found: usize, needed: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("zero vector")]
    ZeroVector,

    #[error("degenerate sweep: {0}")]
    DegenerateSweep(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
