//! Scoring suspect regions against ground truth, and overlay rendering.
//!
//! A truth entry flagged `hides_camera` is a target. Each target's
//! `best_iou` is its best overlap with any suspect (0 when there are no
//! suspects); `matched` means `best_iou > match_tau`. The mean includes
//! every target, so a missed target pulls the average down with its 0.
//! Suspects are not assigned exclusively: one suspect may match several
//! targets, which is harmless while targets are spatially disjoint.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::SuspectRegion;
use crate::geometry::{iou, Box2D};
use crate::raster::ImageGrid;

/// Default IoU threshold above which a target counts as matched. Any
/// small positive value distinguishes "some overlap" from "missed
/// entirely"; 0.05 also tolerates slightly loose fallback boxes.
pub const DEFAULT_MATCH_TAU: f64 = 0.05;

/// One annotated object in a scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthObject {
    pub name: String,
    #[serde(rename = "box")]
    pub bbox: Box2D,
    pub hides_camera: bool,
}

/// Per-target score line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetScore {
    pub name: String,
    pub best_iou: f64,
    pub matched: bool,
}

/// Aggregate agreement between suspects and ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_target: Vec<TargetScore>,
    /// Fraction of targets matched.
    pub accuracy: f64,
    /// Arithmetic mean of `best_iou` over all targets.
    pub mean_iou: f64,
    pub min_iou: f64,
    pub max_iou: f64,
    pub n_targets: usize,
    pub n_suspects: usize,
}

impl EvalReport {
    /// Plain-text table: one row per target, then a summary line.
    pub fn to_table(&self) -> String {
        let name_width = self
            .per_target
            .iter()
            .map(|t| t.name.len())
            .chain(std::iter::once("target".len()))
            .max()
            .unwrap_or(6);
        let mut out = format!("{:<name_width$}  best_iou  matched\n", "target");
        for t in &self.per_target {
            out.push_str(&format!(
                "{:<name_width$}  {:>8.3}  {}\n",
                t.name,
                t.best_iou,
                if t.matched { "yes" } else { "no" }
            ));
        }
        out.push_str(&format!(
            "targets {}  suspects {}  accuracy {:.3}  mean_iou {:.3}  min_iou {:.3}  max_iou {:.3}\n",
            self.n_targets, self.n_suspects, self.accuracy, self.mean_iou, self.min_iou, self.max_iou
        ));
        out
    }

    pub fn write_json_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut writer = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut writer, self).map_err(|e| Error::json(path, e))?;
        use std::io::Write;
        writeln!(writer).map_err(|e| Error::io(path, e))
    }
}

/// Scores suspects against the camera-hiding targets in `truth`.
///
/// Errors with [`Error::NoGroundTruthTargets`] when no entry hides a
/// camera.
pub fn evaluate(
    suspects: &[SuspectRegion],
    truth: &[GroundTruthObject],
    match_tau: f64,
) -> Result<EvalReport> {
    if !(0.0..=1.0).contains(&match_tau) {
        return Err(Error::InvalidInput(format!(
            "match_tau {match_tau} outside [0, 1]"
        )));
    }
    let targets: Vec<&GroundTruthObject> = truth.iter().filter(|t| t.hides_camera).collect();
    if targets.is_empty() {
        return Err(Error::NoGroundTruthTargets);
    }
    let per_target: Vec<TargetScore> = targets
        .iter()
        .map(|target| {
            let best_iou = suspects
                .iter()
                .map(|s| iou(&s.bbox, &target.bbox))
                .fold(0.0, f64::max);
            TargetScore {
                name: target.name.clone(),
                best_iou,
                matched: best_iou > match_tau,
            }
        })
        .collect();
    let n = per_target.len();
    let matched = per_target.iter().filter(|t| t.matched).count();
    let mean_iou = per_target.iter().map(|t| t.best_iou).sum::<f64>() / n as f64;
    let min_iou = per_target.iter().map(|t| t.best_iou).fold(f64::MAX, f64::min);
    let max_iou = per_target.iter().map(|t| t.best_iou).fold(0.0, f64::max);
    Ok(EvalReport {
        per_target,
        accuracy: matched as f64 / n as f64,
        mean_iou,
        min_iou,
        max_iou,
        n_targets: n,
        n_suspects: suspects.len(),
    })
}

/// Loads ground truth from a JSON list, checking name uniqueness and box
/// validity.
pub fn load_truth(path: impl AsRef<Path>) -> Result<Vec<GroundTruthObject>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let truth: Vec<GroundTruthObject> = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| Error::SchemaViolation(format!("{}: {e}", path.display())))?;
    for (i, obj) in truth.iter().enumerate() {
        if obj.bbox.area() <= 0.0 {
            return Err(Error::SchemaViolation(format!(
                "{}: object {i} ({:?}): box has zero area",
                path.display(),
                obj.name
            )));
        }
    }
    for (i, obj) in truth.iter().enumerate() {
        if truth[..i].iter().any(|other| other.name == obj.name) {
            return Err(Error::SchemaViolation(format!(
                "{}: duplicate object name {:?}",
                path.display(),
                obj.name
            )));
        }
    }
    Ok(truth)
}

/// Writes ground truth as the JSON list [`load_truth`] reads.
pub fn write_truth(truth: &[GroundTruthObject], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut writer, truth).map_err(|e| Error::json(path, e))?;
    use std::io::Write;
    writeln!(writer).map_err(|e| Error::io(path, e))
}

/// Renders result boxes over a copy of the image: camera-hiding truth
/// boxes stroked in pure blue, suspect boxes in pure green, both as
/// 2-pixel borders drawn inward from the box boundary. Green is drawn
/// last, so coincident strokes read as output. Grayscale input is
/// promoted to RGB.
pub fn render_overlay(
    rgb: &ImageGrid,
    suspects: &[SuspectRegion],
    truth: &[GroundTruthObject],
) -> ImageGrid {
    let mut out = rgb.to_rgb();
    for target in truth.iter().filter(|t| t.hides_camera) {
        stroke_box(&mut out, &target.bbox, [0.0, 0.0, 1.0]);
    }
    for suspect in suspects {
        stroke_box(&mut out, &suspect.bbox, [0.0, 1.0, 0.0]);
    }
    out
}

const STROKE_WIDTH: i64 = 2;

fn stroke_box(img: &mut ImageGrid, bbox: &Box2D, color: [f64; 3]) {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let x0 = (bbox.x.round() as i64).clamp(0, w);
    let y0 = (bbox.y.round() as i64).clamp(0, h);
    let x1 = ((bbox.x + bbox.w).round() as i64).clamp(0, w);
    let y1 = ((bbox.y + bbox.h).round() as i64).clamp(0, h);
    for y in y0..y1 {
        for x in x0..x1 {
            let on_border = x < x0 + STROKE_WIDTH
                || x >= x1 - STROKE_WIDTH
                || y < y0 + STROKE_WIDTH
                || y >= y1 - STROKE_WIDTH;
            if on_border {
                for (ch, &value) in color.iter().enumerate() {
                    img.set(x as usize, y as usize, ch, value);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::Association;

    fn suspect(x: f64, y: f64, w: f64, h: f64) -> SuspectRegion {
        SuspectRegion {
            bbox: Box2D::new(x, y, w, h),
            label: "object".to_string(),
            association: Association::EnclosingBox,
            source_contours: vec![0],
        }
    }

    fn target(name: &str, x: f64, y: f64, w: f64, h: f64) -> GroundTruthObject {
        GroundTruthObject {
            name: name.to_string(),
            bbox: Box2D::new(x, y, w, h),
            hides_camera: true,
        }
    }

    #[test]
    fn perfect_suspects_score_one() {
        let truth: Vec<GroundTruthObject> = (0..5)
            .map(|i| target(&format!("t{i}"), 100.0 * i as f64, 0.0, 50.0, 50.0))
            .collect();
        let suspects: Vec<SuspectRegion> = truth
            .iter()
            .map(|t| suspect(t.bbox.x, t.bbox.y, t.bbox.w, t.bbox.h))
            .collect();
        let report = evaluate(&suspects, &truth, DEFAULT_MATCH_TAU).unwrap();
        assert_eq!(report.accuracy, 1.0);
        assert_eq!(report.mean_iou, 1.0);
        assert_eq!(report.min_iou, 1.0);
        assert_eq!(report.max_iou, 1.0);
        assert_eq!(report.n_targets, 5);
        assert_eq!(report.n_suspects, 5);
    }

    #[test]
    fn no_suspects_scores_zero() {
        let truth = vec![target("a", 0.0, 0.0, 10.0, 10.0)];
        let report = evaluate(&[], &truth, DEFAULT_MATCH_TAU).unwrap();
        assert_eq!(report.accuracy, 0.0);
        assert_eq!(report.mean_iou, 0.0);
        assert_eq!(report.n_suspects, 0);
    }

    #[test]
    fn four_of_five_replica() {
        // Four matched targets (one at IoU 0.881-ish) and one missed;
        // accuracy 4/5, min 0, max the strongest overlap.
        let truth: Vec<GroundTruthObject> = (0..5)
            .map(|i| target(&format!("t{i}"), 200.0 * i as f64, 0.0, 100.0, 100.0))
            .collect();
        let suspects = vec![
            suspect(0.0, 0.0, 100.0, 106.7),   // ~0.937 on t0
            suspect(203.0, 3.0, 100.0, 100.0), // offset on t1
            suspect(410.0, 10.0, 80.0, 80.0),  // inside t2
            suspect(605.0, 0.0, 100.0, 100.0), // offset on t3
        ];
        // t4 missed entirely.
        let report = evaluate(&suspects, &truth, DEFAULT_MATCH_TAU).unwrap();
        assert_eq!(report.accuracy, 0.8);
        assert_eq!(report.min_iou, 0.0);
        assert!(report.max_iou > 0.88);
        assert!(report.per_target[4].best_iou == 0.0 && !report.per_target[4].matched);
    }

    #[test]
    fn zero_targets_is_error() {
        let truth = vec![GroundTruthObject {
            name: "distractor".to_string(),
            bbox: Box2D::new(0.0, 0.0, 10.0, 10.0),
            hides_camera: false,
        }];
        let err = evaluate(&[], &truth, DEFAULT_MATCH_TAU).unwrap_err();
        assert!(err.to_string().contains("no ground-truth targets"));
    }

    #[test]
    fn distractors_are_not_scored() {
        let mut truth = vec![target("hider", 0.0, 0.0, 10.0, 10.0)];
        truth.push(GroundTruthObject {
            name: "distractor".to_string(),
            bbox: Box2D::new(50.0, 50.0, 10.0, 10.0),
            hides_camera: false,
        });
        let report = evaluate(&[suspect(0.0, 0.0, 10.0, 10.0)], &truth, 0.05).unwrap();
        assert_eq!(report.n_targets, 1);
        assert_eq!(report.accuracy, 1.0);
    }

    #[test]
    fn table_lists_each_target() {
        let truth = vec![
            target("Wine Box", 0.0, 0.0, 10.0, 10.0),
            target("Toy Car", 50.0, 0.0, 10.0, 10.0),
        ];
        let report = evaluate(&[suspect(0.0, 0.0, 10.0, 10.0)], &truth, 0.05).unwrap();
        let table = report.to_table();
        assert!(table.contains("Wine Box"));
        assert!(table.contains("Toy Car"));
        assert!(table.contains("accuracy 0.500"));
        assert!(table.contains("1.000"));
        assert!(table.contains("0.000"));
    }

    #[test]
    fn truth_loader_rejects_duplicate_names() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("truth.json");
        std::fs::write(
            &path,
            r#"[{"name":"a","box":[0,0,1,1],"hides_camera":true},
                {"name":"a","box":[5,5,1,1],"hides_camera":false}]"#,
        )
        .unwrap();
        let err = load_truth(&path).unwrap_err();
        assert!(err.to_string().contains("duplicate object name"));
    }

    #[test]
    fn overlay_no_boxes_is_identity() {
        let img = ImageGrid::filled(20, 20, 3, 0.5).unwrap();
        let out = render_overlay(&img, &[], &[]);
        assert_eq!(out, img);
    }

    #[test]
    fn overlay_truth_box_strokes_exact_border() {
        let img = ImageGrid::filled(30, 30, 3, 0.5).unwrap();
        let truth = vec![target("a", 5.0, 6.0, 10.0, 8.0)];
        let out = render_overlay(&img, &[], &truth);

        // Pixel-diff oracle: exactly the 2-pixel border of [5,15)x[6,14)
        // differs, and differing pixels are pure blue.
        let mut diff_count = 0;
        for y in 0..30i64 {
            for x in 0..30i64 {
                let changed = (0..3).any(|ch| {
                    out.get(x as usize, y as usize, ch) != img.get(x as usize, y as usize, ch)
                });
                let inside = (5..15).contains(&x) && (6..14).contains(&y);
                let inner = (7..13).contains(&x) && (8..12).contains(&y);
                let expect_border = inside && !inner;
                assert_eq!(changed, expect_border, "at ({x},{y})");
                if changed {
                    diff_count += 1;
                    assert_eq!(out.get(x as usize, y as usize, 0), 0.0);
                    assert_eq!(out.get(x as usize, y as usize, 1), 0.0);
                    assert_eq!(out.get(x as usize, y as usize, 2), 1.0);
                }
            }
        }
        assert_eq!(diff_count, 10 * 8 - 6 * 4);
    }

    #[test]
    fn overlay_green_drawn_over_blue() {
        let img = ImageGrid::filled(30, 30, 3, 0.5).unwrap();
        let truth = vec![target("a", 5.0, 5.0, 10.0, 10.0)];
        let suspects = vec![suspect(5.0, 5.0, 10.0, 10.0)];
        let out = render_overlay(&img, &suspects, &truth);
        assert_eq!(out.get(5, 5, 1), 1.0);
        assert_eq!(out.get(5, 5, 2), 0.0);
    }

    #[test]
    fn overlay_clamps_out_of_bounds_boxes() {
        let img = ImageGrid::filled(10, 10, 3, 0.5).unwrap();
        let suspects = vec![suspect(-5.0, -5.0, 30.0, 30.0)];
        let out = render_overlay(&img, &suspects, &[]);
        // The clamped rect's border is stroked; its interior is untouched.
        assert_eq!(out.get(0, 0, 1), 1.0);
        assert_eq!(out.get(9, 9, 1), 1.0);
        assert_eq!(out.get(5, 5, 0), 0.5);
        assert_eq!(out.get(5, 5, 1), 0.5);
    }
}
