//! The scan composition: warp, threshold, contours, detections,
//! association, label filtering.
//!
//! `cmd scan` in the CLI is a thin wrapper around [`scan`], so scripted
//! runs and library callers see byte-identical suspect lists for the
//! same inputs.

use serde::{Deserialize, Serialize};

use crate::detection::{filter_confidence, validate_detections, Detection, DEFAULT_MIN_CONFIDENCE};
use crate::error::Result;
use crate::fusion::{associate, filter_labels, SuspectRegion, DEFAULT_DENY_LABELS, DEFAULT_FALLBACK_MARGIN};
use crate::raster::ThermalGrid;
use crate::registration::{warp_thermal, AffineMap};
use crate::thermal::{extract_contours, threshold_mask, HeatContour, HeatMask, ThresholdMode, DEFAULT_MIN_CONTOUR_AREA, DEFAULT_ROBUST_K};

/// Pipeline knobs with the built-in defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanOptions {
    pub threshold: ThresholdMode,
    pub min_contour_area: usize,
    pub min_confidence: f64,
    /// Labels removed from the suspect list, case-insensitive.
    pub deny_labels: Vec<String>,
    pub allow_fallback: bool,
    pub fallback_margin: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            threshold: ThresholdMode::RobustSigma(DEFAULT_ROBUST_K),
            min_contour_area: DEFAULT_MIN_CONTOUR_AREA,
            min_confidence: DEFAULT_MIN_CONFIDENCE,
            deny_labels: DEFAULT_DENY_LABELS.iter().map(|s| s.to_string()).collect(),
            allow_fallback: false,
            fallback_margin: DEFAULT_FALLBACK_MARGIN,
        }
    }
}

/// Intermediate products of a scan, for debugging and overlay output.
#[derive(Debug, Clone)]
pub struct ScanOutput {
    pub warped: ThermalGrid,
    pub mask: HeatMask,
    pub contours: Vec<HeatContour>,
    pub suspects: Vec<SuspectRegion>,
}

/// Runs the full association pipeline against an RGB frame of
/// `out_width` x `out_height` pixels.
pub fn scan(
    thermal: &ThermalGrid,
    map: &AffineMap,
    detections: &[Detection],
    out_width: usize,
    out_height: usize,
    opts: &ScanOptions,
) -> Result<ScanOutput> {
    validate_detections(detections)?;
    let warped = warp_thermal(thermal, map, out_width, out_height)?;
    let mask = threshold_mask(&warped, opts.threshold)?;
    let contours = extract_contours(&mask, &warped, opts.min_contour_area);
    let kept = filter_confidence(detections, opts.min_confidence);
    let suspects = associate(&contours, &kept, opts.allow_fallback, opts.fallback_margin);
    let suspects = filter_labels(suspects, &opts.deny_labels);
    Ok(ScanOutput {
        warped,
        mask,
        contours,
        suspects,
    })
}

/// Serializes suspects exactly as `suspects.json` is written: a pretty
/// JSON list with a trailing newline.
pub fn suspects_to_json(suspects: &[SuspectRegion]) -> String {
    let mut out = serde_json::to_string_pretty(suspects).expect("suspects serialize");
    out.push('\n');
    out
}

/// `report.json` serialization: pretty JSON with a trailing newline.
pub fn report_to_json<T: Serialize>(report: &T) -> String {
    let mut out = serde_json::to_string_pretty(report).expect("report serialize");
    out.push('\n');
    out
}

/// Threshold mode plus parameter in the form the CLI and config files
/// use: `absolute` with a Celsius cutoff or `robust-sigma` with a
/// multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdModeName {
    Absolute,
    RobustSigma,
}

impl ThresholdModeName {
    pub fn with_param(self, param: f64) -> ThresholdMode {
        match self {
            ThresholdModeName::Absolute => ThresholdMode::Absolute(param),
            ThresholdModeName::RobustSigma => ThresholdMode::RobustSigma(param),
        }
    }
}
