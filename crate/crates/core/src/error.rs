use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure categories. Each maps onto a distinct CLI exit status.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("inconsistent topology: {0}")]
    InconsistentTopology(String),

    #[error("spectrum cutoff insufficient on {context}: have {have}, need {need}")]
    CutoffInsufficient { context: String, have: f64, need: f64 },

    #[error("rate {rate} on end {end} is exceptional (weight {gamma} within {distance:e})")]
    ExceptionalRate {
        end: usize,
        rate: f64,
        gamma: f64,
        distance: f64,
    },

    #[error("stability violation: {0}")]
    StabilityViolation(String),

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("eigensolver did not converge within {iterations} iterations (worst residual {worst:e})")]
    Convergence {
        iterations: usize,
        worst: f64,
        residuals: Vec<f64>,
    },

    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Diagnostics raised while reading or validating a triangle mesh.
#[derive(Debug, Error)]
pub enum MeshError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("OFF parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("face {face} has {arity} vertices; only triangles are supported")]
    NonTriangleFace { face: usize, arity: usize },

    #[error("face {face} references vertex {index} but the mesh has {count} vertices")]
    IndexOutOfRange {
        face: usize,
        index: usize,
        count: usize,
    },

    #[error("face {face} is degenerate (zero area or repeated vertex)")]
    DegenerateFace { face: usize },

    #[error("vertex {0} is not used by any face")]
    UnreferencedVertex(usize),

    #[error("edge ({0}, {1}) lies on a single face: mesh has boundary")]
    BoundaryEdge(usize, usize),

    #[error("edge ({0}, {1}) is shared by {2} faces: mesh is not a manifold")]
    NonManifoldEdge(usize, usize, usize),

    #[error("faces adjacent along edge ({0}, {1}) are inconsistently oriented")]
    InconsistentOrientation(usize, usize),

    #[error("face {face} has minimum angle {angle_deg:.4} degrees, below the {floor_deg} degree floor")]
    IllConditioned {
        face: usize,
        angle_deg: f64,
        floor_deg: f64,
    },
}
