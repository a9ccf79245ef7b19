//! Object detections and the pluggable provider seam.
//!
//! Neural detectors stay outside the build: their output is consumed
//! through a JSON detections file, so the pipeline is hermetic and
//! deterministic. A contrast-based baseline detector covers synthetic
//! scenes. Either way, every detection is validated at the boundary
//! before it reaches fusion.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Box2D;
use crate::labeling;
use crate::raster::ImageGrid;

/// Default confidence floor applied before association.
pub const DEFAULT_MIN_CONFIDENCE: f64 = 0.1;
/// Smallest connected component the baseline detector reports, in pixels.
pub const BASELINE_MIN_AREA: usize = 16;

/// A labeled candidate box from a detection provider, in RGB pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    #[serde(rename = "box")]
    pub bbox: Box2D,
    pub label: String,
    pub confidence: f64,
}

impl Detection {
    /// Checks the detection invariants: positive-area box, confidence in
    /// `[0, 1]`, non-empty label.
    pub fn validate(&self) -> Result<()> {
        self.bbox.validate()?;
        if self.bbox.area() <= 0.0 {
            return Err(Error::SchemaViolation(format!(
                "box [{}, {}, {}, {}] has zero area",
                self.bbox.x, self.bbox.y, self.bbox.w, self.bbox.h
            )));
        }
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(Error::SchemaViolation(format!(
                "confidence {} outside [0, 1]",
                self.confidence
            )));
        }
        if self.label.is_empty() {
            return Err(Error::SchemaViolation("label is empty".to_string()));
        }
        Ok(())
    }
}

/// Anything that can produce detections for an RGB image.
///
/// Implementations must be safe for concurrent read-only use; callers
/// validate the returned detections at the boundary.
pub trait DetectionProvider {
    fn detect(&self, rgb: &ImageGrid) -> Result<Vec<Detection>>;
}

/// Rejects any detection that violates the [`Detection`] invariants.
pub fn validate_detections(dets: &[Detection]) -> Result<()> {
    for (i, det) in dets.iter().enumerate() {
        det.validate()
            .map_err(|e| Error::SchemaViolation(format!("detection {i}: {e}")))?;
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct DetectionsFile {
    images: Vec<ImageDetections>,
}

#[derive(Serialize, Deserialize)]
struct ImageDetections {
    id: String,
    detections: Vec<Detection>,
}

/// Loads detections for `image_id` from a detections file:
///
/// ```json
/// {"images": [{"id": "scene1", "detections":
///   [{"box": [x, y, w, h], "label": "book", "confidence": 0.62}]}]}
/// ```
///
/// Records are returned in file order. An unknown `image_id` yields an
/// empty list; malformed records and out-of-range confidences are schema
/// violations naming the offending field.
pub fn load_detections_file(path: impl AsRef<Path>, image_id: &str) -> Result<Vec<Detection>> {
    let parsed = read_detections_file(path)?;
    for image in parsed.images {
        if image.id == image_id {
            return Ok(image.detections);
        }
    }
    Ok(Vec::new())
}

/// Lists the image ids present in a detections file, in file order.
pub fn list_detection_image_ids(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let parsed = read_detections_file(path)?;
    Ok(parsed.images.into_iter().map(|img| img.id).collect())
}

/// Writes a single-image detections file in the schema
/// [`load_detections_file`] reads.
pub fn write_detections_file(
    path: impl AsRef<Path>,
    image_id: &str,
    dets: &[Detection],
) -> Result<()> {
    let path = path.as_ref();
    let file = DetectionsFile {
        images: vec![ImageDetections {
            id: image_id.to_string(),
            detections: dets.to_vec(),
        }],
    };
    let out = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = std::io::BufWriter::new(out);
    serde_json::to_writer_pretty(&mut writer, &file).map_err(|e| Error::json(path, e))?;
    use std::io::Write;
    writeln!(writer).map_err(|e| Error::io(path, e))
}

fn read_detections_file(path: impl AsRef<Path>) -> Result<DetectionsFile> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let parsed: DetectionsFile = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| Error::SchemaViolation(format!("{}: {e}", path.display())))?;
    for image in &parsed.images {
        for (i, det) in image.detections.iter().enumerate() {
            det.validate().map_err(|e| {
                Error::SchemaViolation(format!(
                    "{}: image {:?}, detection {i}: {e}",
                    path.display(),
                    image.id
                ))
            })?;
        }
    }
    Ok(parsed)
}

/// Contrast-based oracle detector for synthetic scenes.
///
/// Segments pixels whose luma differs from `background_luma` by more than
/// `tol`, extracts 8-connected components of at least
/// [`BASELINE_MIN_AREA`] pixels, and reports each component's bounding
/// box with label `"object"` and confidence 1.0.
pub fn baseline_detect(rgb: &ImageGrid, background_luma: f64, tol: f64) -> Vec<Detection> {
    let (w, h) = (rgb.width(), rgb.height());
    let mut bits = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            bits[y * w + x] = (rgb.luma(x, y) - background_luma).abs() > tol;
        }
    }
    labeling::components_8(w, h, &bits)
        .into_iter()
        .filter(|c| c.pixels.len() >= BASELINE_MIN_AREA)
        .map(|c| {
            let mut min_x = usize::MAX;
            let mut min_y = usize::MAX;
            let mut max_x = 0usize;
            let mut max_y = 0usize;
            for &idx in &c.pixels {
                let x = idx % w;
                let y = idx / w;
                min_x = min_x.min(x);
                min_y = min_y.min(y);
                max_x = max_x.max(x);
                max_y = max_y.max(y);
            }
            Detection {
                bbox: Box2D::new(
                    min_x as f64,
                    min_y as f64,
                    (max_x - min_x + 1) as f64,
                    (max_y - min_y + 1) as f64,
                ),
                label: "object".to_string(),
                confidence: 1.0,
            }
        })
        .collect()
}

/// A provider backed by the baseline contrast detector.
#[derive(Debug, Clone, Copy)]
pub struct BaselineDetector {
    pub background_luma: f64,
    pub tol: f64,
}

impl DetectionProvider for BaselineDetector {
    fn detect(&self, rgb: &ImageGrid) -> Result<Vec<Detection>> {
        Ok(baseline_detect(rgb, self.background_luma, self.tol))
    }
}

/// A provider that replays a fixed set of detections, e.g. loaded from a
/// detections file.
#[derive(Debug, Clone)]
pub struct StaticDetections(pub Vec<Detection>);

impl DetectionProvider for StaticDetections {
    fn detect(&self, _rgb: &ImageGrid) -> Result<Vec<Detection>> {
        Ok(self.0.clone())
    }
}

/// Keeps detections with `confidence >= min_conf`, preserving order.
pub fn filter_confidence(dets: &[Detection], min_conf: f64) -> Vec<Detection> {
    dets.iter()
        .filter(|d| d.confidence >= min_conf)
        .cloned()
        .collect()
}
