//! Thresholding a thermal grid into a heat mask and extracting connected
//! warm regions.
//!
//! The default threshold is scene-adaptive: `median + k * MAD-sigma`,
//! where MAD-sigma is the median absolute deviation scaled by 1.4826 to
//! estimate a standard deviation robustly. When the MAD collapses to zero
//! (a flat background, common in synthetic scenes) the cutoff falls back
//! to `median + 1.0` C so isolated hot pixels still register.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Box2D, Point2D};
use crate::labeling;
use crate::raster::{median_of, ThermalGrid};

/// Default robust-sigma multiplier.
pub const DEFAULT_ROBUST_K: f64 = 6.0;
/// Default minimum contour area in (warped) pixels; suppresses
/// single-pixel sensor noise.
pub const DEFAULT_MIN_CONTOUR_AREA: usize = 4;
/// Scale factor turning a median absolute deviation into a robust
/// standard deviation estimate.
pub const MAD_SIGMA_SCALE: f64 = 1.4826;

/// How the heat cutoff is derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdMode {
    /// Fixed cutoff in degrees Celsius.
    Absolute(f64),
    /// Scene-adaptive cutoff `median + k * MAD-sigma`, falling back to
    /// `median + 1.0` when the MAD-sigma is zero.
    RobustSigma(f64),
}

/// A binary heat mask with the cutoff that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
    pub threshold_used: f64,
}

impl HeatMask {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count_set(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Writes the mask as a true 1-bit grayscale PNG (set bits white),
    /// rows packed most-significant-bit first.
    pub fn write_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut encoder = png::Encoder::new(
            BufWriter::new(file),
            self.width as u32,
            self.height as u32,
        );
        encoder.set_color(png::ColorType::Grayscale);
        encoder.set_depth(png::BitDepth::One);
        let mut writer = encoder
            .write_header()
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        let row_bytes = self.width.div_ceil(8);
        let mut data = vec![0u8; row_bytes * self.height];
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    data[y * row_bytes + x / 8] |= 0x80 >> (x % 8);
                }
            }
        }
        writer
            .write_image_data(&data)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
    }
}

/// A connected warm region extracted from a heat mask.
///
/// `centroid` is the unweighted mean of member pixel centers (pixel
/// `(x, y)` has center `(x + 0.5, y + 0.5)`), which always lies inside
/// `bbox` under the half-open box convention. `id` is the region's index
/// in the extraction order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatContour {
    pub id: usize,
    pub pixel_count: usize,
    pub centroid: Point2D,
    pub bbox: Box2D,
    pub peak_temp: f64,
}

/// Derives a binary mask: a bit is set iff its sample exceeds the cutoff.
pub fn threshold_mask(t: &ThermalGrid, mode: ThresholdMode) -> Result<HeatMask> {
    let cutoff = match mode {
        ThresholdMode::Absolute(c) => {
            if !c.is_finite() {
                return Err(Error::InvalidThresholdParameter(format!(
                    "absolute cutoff {c}"
                )));
            }
            c
        }
        ThresholdMode::RobustSigma(k) => {
            if !k.is_finite() {
                return Err(Error::InvalidThresholdParameter(format!(
                    "robust-sigma multiplier {k}"
                )));
            }
            let median = t.median();
            let mut abs_dev: Vec<f64> = t.temps().iter().map(|&v| (v - median).abs()).collect();
            let mad_sigma = MAD_SIGMA_SCALE * median_of(&mut abs_dev);
            if mad_sigma > 0.0 {
                median + k * mad_sigma
            } else {
                median + 1.0
            }
        }
    };
    let bits = t.temps().iter().map(|&v| v > cutoff).collect();
    Ok(HeatMask {
        width: t.width(),
        height: t.height(),
        bits,
        threshold_used: cutoff,
    })
}

/// Extracts 8-connected heat contours with at least `min_area` pixels.
///
/// `source` supplies the per-pixel temperatures for `peak_temp` and must
/// be the grid the mask was thresholded from. Contours are ordered by
/// descending pixel count, ties broken by ascending `(bbox.y, bbox.x)`;
/// ids follow that order.
///
/// # Panics
/// Panics if the mask and source grid dimensions differ.
pub fn extract_contours(
    mask: &HeatMask,
    source: &ThermalGrid,
    min_area: usize,
) -> Vec<HeatContour> {
    assert_eq!(
        (mask.width, mask.height),
        (source.width(), source.height()),
        "mask and source grid dimensions must match"
    );
    let mut contours: Vec<HeatContour> = labeling::components_8(mask.width, mask.height, &mask.bits)
        .into_iter()
        .filter(|c| c.pixels.len() >= min_area.max(1))
        .map(|c| {
            let mut min_x = usize::MAX;
            let mut min_y = usize::MAX;
            let mut max_x = 0usize;
            let mut max_y = 0usize;
            let mut sum_x = 0.0f64;
            let mut sum_y = 0.0f64;
            let mut peak = f64::NEG_INFINITY;
            for &idx in &c.pixels {
                let x = idx % mask.width;
                let y = idx / mask.width;
                min_x = min_x.min(x);
                min_y = min_y.min(y);
                max_x = max_x.max(x);
                max_y = max_y.max(y);
                sum_x += x as f64 + 0.5;
                sum_y += y as f64 + 0.5;
                peak = peak.max(source.get(x, y));
            }
            let n = c.pixels.len() as f64;
            HeatContour {
                id: 0, // assigned after sorting
                pixel_count: c.pixels.len(),
                centroid: Point2D::new(sum_x / n, sum_y / n),
                bbox: Box2D::new(
                    min_x as f64,
                    min_y as f64,
                    (max_x - min_x + 1) as f64,
                    (max_y - min_y + 1) as f64,
                ),
                peak_temp: peak,
            }
        })
        .collect();
    contours.sort_by(|a, b| {
        b.pixel_count
            .cmp(&a.pixel_count)
            .then(a.bbox.y.total_cmp(&b.bbox.y))
            .then(a.bbox.x.total_cmp(&b.bbox.x))
    });
    for (id, contour) in contours.iter_mut().enumerate() {
        contour.id = id;
    }
    contours
}

/// Writes contours as a JSON list with all fields.
pub fn write_contours_json(contours: &[HeatContour], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut writer, contours).map_err(|e| Error::json(path, e))?;
    use std::io::Write;
    writeln!(writer).map_err(|e| Error::io(path, e))
}
