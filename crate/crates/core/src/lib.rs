//! Locates objects likely to conceal powered cameras by fusing a
//! low-resolution thermal grid with a high-resolution RGB frame.
//!
//! The pipeline: register the thermal grid into RGB coordinates, warp
//! and threshold it into a heat mask, extract connected heat contours,
//! and associate each contour with the object detection box that
//! encloses its centroid. Detection boxes come from a pluggable provider
//! (a detections file or the built-in contrast baseline). An evaluation
//! harness scores suspect regions against ground truth by IoU, and a
//! deterministic scene generator reproduces the whole experiment at desk
//! scale for testing.
//!
//! All types are plain immutable values and every operation is a pure
//! function of its inputs, so everything here is safe to use from any
//! number of threads.

pub mod detection;
pub mod error;
pub mod eval;
pub mod fusion;
pub mod geometry;
mod labeling;
pub mod pipeline;
pub mod raster;
pub mod registration;
pub mod rng;
pub mod synth;
pub mod thermal;

pub use detection::{Detection, DetectionProvider};
pub use error::{Error, Result};
pub use eval::{EvalReport, GroundTruthObject};
pub use fusion::{Association, SuspectRegion};
pub use geometry::{iou, Box2D, Point2D};
pub use pipeline::{scan, ScanOptions, ScanOutput};
pub use raster::{ImageGrid, SensorMeta, ThermalGrid};
pub use registration::{apply_map, fit_affine, warp_thermal, AffineMap, Correspondence};
pub use synth::{generate_scene, SceneSpec, SynthScene};
pub use thermal::{extract_contours, threshold_mask, HeatContour, HeatMask, ThresholdMode};
