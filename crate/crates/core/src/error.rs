use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the pipeline.
///
/// Variants fall into two groups that the CLI maps to distinct exit codes:
/// I/O and parse failures (see [`SgrError::is_io`]) and domain failures.
#[derive(Debug, Error)]
pub enum SgrError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("face references missing vertex (face {face}, index {index}, vertex count {vertex_count})")]
    MissingVertex {
        face: usize,
        index: usize,
        vertex_count: usize,
    },
    #[error("empty mesh")]
    EmptyMesh,
    #[error("degenerate face {0}")]
    DegenerateFace(usize),
    #[error("non-manifold edge ({0}, {1})")]
    NonManifoldEdge(usize, usize),
    #[error("isolated vertex {0}")]
    IsolatedVertex(usize),
    #[error("topology violation: {0}")]
    Topology(String),
    #[error("genus must be zero (found {0})")]
    NonZeroGenus(i64),
    #[error("degenerate ring edge {0}")]
    DegenerateRingEdge(usize),
    #[error("empty kernel for vertex {0}")]
    EmptyKernel(usize),
    #[error("invalid embedding: face {0} is flipped or degenerate")]
    InvalidEmbedding(usize),
    #[error("zero-area triangle")]
    ZeroArea,
    #[error("signal length {signal} does not match vertex count {vertices}")]
    SignalMismatch { signal: usize, vertices: usize },
    #[error("need at least 4 distinct sphere points, got {0}")]
    TooFewPoints(usize),
    #[error("missing quantization metadata: {0}")]
    MissingMetadata(PathBuf),
    #[error("geometry kind required")]
    GeometryKindRequired,
    #[error("embedding does not match mesh")]
    HashMismatch,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("internal failure: {0}")]
    Internal(String),
}

impl SgrError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SgrError::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by unreadable, unwritable or malformed files.
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            SgrError::Io { .. }
                | SgrError::Parse(_)
                | SgrError::MissingVertex { .. }
                | SgrError::EmptyMesh
                | SgrError::MissingMetadata(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, SgrError>;
