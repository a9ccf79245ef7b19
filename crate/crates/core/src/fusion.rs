//! Associating heat contours with detection boxes into suspect regions.
//!
//! The association predicate is centroid containment: a detection box
//! claims a contour when it contains the contour's centroid. This is
//! robust to the resolution mismatch between an 80x60 thermal sensor and
//! a multi-megapixel RGB frame, where warped heat blobs are large and
//! fuzzy and box/blob overlap fractions are unstable. When several boxes
//! contain the centroid, the smallest-area box wins: a camera hides in
//! the most specific object, not in its container.

use serde::{Deserialize, Serialize};

use crate::detection::Detection;
use crate::geometry::Box2D;
use crate::thermal::HeatContour;

/// Default margin, in pixels, applied around a contour bbox when
/// emitting a fallback region.
pub const DEFAULT_FALLBACK_MARGIN: f64 = 20.0;
/// Default label denylist: natural heat sources a room sweep should
/// ignore.
pub const DEFAULT_DENY_LABELS: &[&str] = &["person", "oven"];
/// Label given to fallback regions, which have no detection to name them.
pub const FALLBACK_LABEL: &str = "unknown";

/// How a suspect region was derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Association {
    /// The region is a detection box that encloses heat-trace centroids.
    EnclosingBox,
    /// No detection box contained the centroid; the region is the
    /// contour bbox dilated by the fallback margin.
    ContourFallback,
}

/// An output box implicating an object as potentially concealing a
/// camera.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuspectRegion {
    #[serde(rename = "box")]
    pub bbox: Box2D,
    pub label: String,
    pub association: Association,
    /// Ids of the heat contours that selected this region; ascending,
    /// never empty.
    pub source_contours: Vec<usize>,
}

/// Associates each contour with the detection box containing its
/// centroid.
///
/// Selection among multiple containing boxes is by smallest area, ties
/// broken by lowest `(y, x)` corner, then input order. Contours that
/// select the same detection are merged into one region. A contour no
/// box contains either becomes a dilated-bbox fallback region (when
/// `allow_fallback`) or is dropped. Output regions are ordered by their
/// first contributing contour.
pub fn associate(
    contours: &[HeatContour],
    dets: &[Detection],
    allow_fallback: bool,
    fallback_margin: f64,
) -> Vec<SuspectRegion> {
    // det index -> (first contour position, contour ids)
    let mut claimed: Vec<Option<(usize, Vec<usize>)>> = vec![None; dets.len()];
    let mut ordered: Vec<(usize, SuspectKind)> = Vec::new();

    for (pos, contour) in contours.iter().enumerate() {
        let best = dets
            .iter()
            .enumerate()
            .filter(|(_, d)| d.bbox.contains(contour.centroid))
            .min_by(|(ai, a), (bi, b)| {
                a.bbox
                    .area()
                    .total_cmp(&b.bbox.area())
                    .then(a.bbox.y.total_cmp(&b.bbox.y))
                    .then(a.bbox.x.total_cmp(&b.bbox.x))
                    .then(ai.cmp(bi))
            });
        match best {
            Some((det_idx, _)) => match &mut claimed[det_idx] {
                Some((_, ids)) => ids.push(contour.id),
                None => {
                    claimed[det_idx] = Some((pos, vec![contour.id]));
                    ordered.push((pos, SuspectKind::Detection(det_idx)));
                }
            },
            None if allow_fallback => {
                ordered.push((pos, SuspectKind::Fallback(contour.id)));
            }
            None => {}
        }
    }

    ordered.sort_by_key(|(pos, _)| *pos);
    ordered
        .into_iter()
        .map(|(_, kind)| match kind {
            SuspectKind::Detection(det_idx) => {
                let (_, mut ids) = claimed[det_idx].take().expect("claimed above");
                ids.sort_unstable();
                SuspectRegion {
                    bbox: dets[det_idx].bbox,
                    label: dets[det_idx].label.clone(),
                    association: Association::EnclosingBox,
                    source_contours: ids,
                }
            }
            SuspectKind::Fallback(contour_id) => {
                let contour = contours
                    .iter()
                    .find(|c| c.id == contour_id)
                    .expect("id taken from this list");
                SuspectRegion {
                    bbox: contour.bbox.dilate(fallback_margin),
                    label: FALLBACK_LABEL.to_string(),
                    association: Association::ContourFallback,
                    source_contours: vec![contour_id],
                }
            }
        })
        .collect()
}

enum SuspectKind {
    Detection(usize),
    Fallback(usize),
}

/// Reads a suspects list as written by the scan pipeline, checking that
/// every region names at least one source contour.
pub fn load_suspects(path: impl AsRef<std::path::Path>) -> crate::error::Result<Vec<SuspectRegion>> {
    use crate::error::Error;
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let suspects: Vec<SuspectRegion> = serde_json::from_reader(std::io::BufReader::new(file))
        .map_err(|e| Error::SchemaViolation(format!("{}: {e}", path.display())))?;
    for (i, s) in suspects.iter().enumerate() {
        if s.source_contours.is_empty() {
            return Err(Error::SchemaViolation(format!(
                "{}: suspect {i}: source_contours is empty",
                path.display()
            )));
        }
    }
    Ok(suspects)
}

/// Removes suspect regions whose label is in the denylist
/// (case-insensitive), preserving order.
pub fn filter_labels(suspects: Vec<SuspectRegion>, denylist: &[String]) -> Vec<SuspectRegion> {
    let denied: Vec<String> = denylist.iter().map(|l| l.to_lowercase()).collect();
    suspects
        .into_iter()
        .filter(|s| !denied.contains(&s.label.to_lowercase()))
        .collect()
}
