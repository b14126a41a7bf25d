//! rastershape: raster-based shape vectors for shape retrieval.
//!
//! A circular raster (concentric circles crossed by radial lines) or an
//! Archimedean-spiral raster (a spiral crossed by radial arms) is laid over a
//! binary shape at its centroid. Counting which sample points fall inside the
//! shape yields four normalized descriptors:
//!
//! * `circ_radial`: per-circle fraction of inside samples;
//! * `circ_angular`: per-radial-line fraction of inside samples;
//! * `spiral_full`: per-turn fraction of inside samples;
//! * `spiral_fixed`: one 0/1 entry per fixed-angle spiral segment.
//!
//! Descriptors are compared by zero-padded Euclidean distance; the
//! [`evaluation`] module measures average retrieval efficiency and matching
//! time over sweeps of separation-between-cycles and samples-per-cycle.
//!
//! Modules:
//!
//! 1. [`shape_io`]: netpbm ingestion, centroid, max radius, occlusion.
//! 2. [`raster`]: sample-point geometry.
//! 3. [`descriptor`]: the four shape vectors.
//! 4. [`matcher`]: descriptor databases and top-k queries.
//! 5. [`evaluation`]: efficiency, timing, sweeps, occlusion experiment.
//! 6. [`synth`]: seeded synthetic corpus.

pub mod descriptor;
pub mod error;
pub mod evaluation;
pub mod matcher;
pub mod raster;
pub mod shape_io;
pub mod synth;

pub use descriptor::{extract, extract_with, ScaleMode, ShapeVector, Variant};
pub use error::{Error, Result};
pub use evaluation::{
    occlusion_experiment, sweep, EfficiencyMode, OcclusionConfig, OcclusionReport, SweepCell,
    SweepConfig, SweepReport,
};
pub use matcher::{distance, query, DescriptorDatabase, DescriptorRecord, Match};
pub use raster::{cycle_count, RasterGrid, RasterKind, RasterSpec, SamplePoint};
pub use shape_io::{
    centroid, load_image, max_radius, occlude, BinaryShape, Centroid, LoadOptions, MaxRadius,
};
