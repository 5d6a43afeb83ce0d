use thiserror::Error;

/// Errors produced by the geometry, transform, sampling and I/O layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value: {0}")]
    NonFinite(&'static str),

    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("degenerate quadrilateral (zero area)")]
    DegenerateQuad,

    #[error("self-intersecting quadrilateral")]
    SelfIntersectingQuad,

    #[error("transform is not an isotropic similarity")]
    NonIsotropic,

    #[error("grid of {height}x{width} is too small to pool")]
    GridTooSmall { height: usize, width: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid geometry range: {0}")]
    InvalidRange(String),

    #[error("branch feasible ranges do not cover the global domain near scale={scale}, angle={angle}")]
    Coverage { scale: f64, angle: f64 },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unknown {what} `{value}`")]
    UnknownKind { what: &'static str, value: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{}: {source}", path.display())]
    IoAt { path: std::path::PathBuf, source: std::io::Error },
}

impl Error {
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_) | Error::IoAt { .. })
    }
}

/// Attaches `path` to a bare I/O error.
pub fn at<T>(path: &std::path::Path, r: std::result::Result<T, std::io::Error>) -> Result<T> {
    r.map_err(|source| Error::IoAt { path: path.to_path_buf(), source })
}

pub type Result<T> = std::result::Result<T, Error>;
