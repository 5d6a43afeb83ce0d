//! Geometry normalization for oriented-box text detection.
//!
//! The crate covers the annotation-side machinery of a multi-branch
//! normalization module: oriented-box geometry ([`geometry`]), the branch
//! transforms on boxes and feature grids ([`gnm`], [`grid`]), geometry-aware
//! sampling and benchmark generation ([`sampling`]), a simulated
//! capacity-limited detector with the multi-branch inference path
//! ([`pipeline`], [`capacity`]), ICDAR-style scoring ([`evaluation`]) and
//! file formats ([`io`]).

pub mod capacity;
pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod gnm;
pub mod grid;
pub mod io;
pub mod pipeline;
pub mod range;
pub mod rng;
pub mod sampling;

pub use error::{Error, Result};
pub use evaluation::{angle_histogram, match_detections, prf, EvalCounts, EvalReport, MatchSet};
pub use geometry::{
    apply_affine_box, normalize_angle, quad_to_rbox, rbox_to_quad, rotated_iou, AffineTransform, Point, Quad,
    RotatedBox,
};
pub use gnm::{canonical_range_of, BranchConfig, GnmConfig, OnuKind, SnuKind};
pub use grid::{onu_grid, snu_grid, FeatureGrid};
pub use pipeline::{nms, oracle_detect, run_pipeline, Detection, OracleDetectorConfig, PipelineConfig};
pub use range::{in_feasible, GeometryRange};
pub use rng::Rng;
pub use sampling::{AnnotatedImage, LabeledInstance, SampleTarget};
