use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested quantity reaches or exceeds what the curve can supply.
    #[error("depletion: quantity {requested} reaches the available potential {available}")]
    Depletion { requested: f64, available: f64 },

    #[error("degenerate anchors: {0}")]
    DegenerateAnchors(String),

    #[error("infeasible anchors: {0}")]
    InfeasibleAnchors(String),

    #[error("points are not monotone: {0}")]
    Monotonicity(String),

    #[error("degenerate fit data: {0}")]
    DegenerateData(String),

    #[error("unit error: {0}")]
    Unit(String),

    #[error("envelope error: {0}")]
    Envelope(String),

    #[error("weight error: {0}")]
    Weight(String),

    #[error("coverage error: missing countries {missing:?}")]
    Coverage { missing: Vec<String> },

    #[error("{file}:{row}: {message}")]
    Parse { file: String, row: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("recipe error: {0}")]
    Recipe(String),

    #[error("missing data file {}", .0.display())]
    MissingFile(PathBuf),

    /// Every failing resource of a database build, in resource order.
    #[error("build failed:\n  {}", .0.join("\n  "))]
    Build(Vec<String>),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(file: impl Into<String>, row: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            file: file.into(),
            row,
            message: message.into(),
        }
    }

    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "DomainError",
            Error::Depletion { .. } => "DepletionError",
            Error::DegenerateAnchors(_) => "DegenerateAnchors",
            Error::InfeasibleAnchors(_) => "InfeasibleAnchors",
            Error::Monotonicity(_) => "MonotonicityError",
            Error::DegenerateData(_) => "DegenerateData",
            Error::Unit(_) => "UnitError",
            Error::Envelope(_) => "EnvelopeError",
            Error::Weight(_) => "WeightError",
            Error::Coverage { .. } => "CoverageError",
            Error::Parse { .. } => "ParseError",
            Error::Validation(_) => "ValidationError",
            Error::Recipe(_) => "RecipeError",
            Error::MissingFile(_) => "MissingFile",
            Error::Build(_) => "BuildError",
            Error::Io(_) => "IoError",
            Error::Json(_) => "JsonError",
        }
    }
}
