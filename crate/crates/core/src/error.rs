use std::path::PathBuf;

use crate::descriptor::Variant;
use crate::raster::RasterSpec;

/// Errors produced anywhere in the raster-shape pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Unsupported magic, malformed header or truncated raster data.
    #[error("format error: {0}")]
    Format(String),

    #[error("shape has no foreground pixels")]
    EmptyShape,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("raster center ({grid_x}, {grid_y}) does not coincide with shape centroid ({shape_x}, {shape_y})")]
    Misaligned {
        grid_x: f64,
        grid_y: f64,
        shape_x: f64,
        shape_y: f64,
    },

    #[error("raster kind does not match the requested vector: {0}")]
    WrongRasterKind(String),

    #[error("incompatible vectors: {left_variant} {left_spec} vs {right_variant} {right_spec}")]
    Incompatible {
        left_variant: Variant,
        left_spec: RasterSpec,
        right_variant: Variant,
        right_spec: RasterSpec,
    },

    #[error("database is empty")]
    EmptyDatabase,

    #[error("unsupported database version {found:?} (expected RASTERDB v1)")]
    Version { found: String },

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("while processing {id}: {source}")]
    Item {
        id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn for_item(id: &str, source: Error) -> Self {
        Error::Item {
            id: id.to_string(),
            source: Box::new(source),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
