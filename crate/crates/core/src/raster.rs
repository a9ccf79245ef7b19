//! Raster containers: RGB/grayscale intensity grids and thermal grids.
//!
//! Intensities are normalized to `[0, 1]` at load time. Thermal samples
//! are degrees Celsius; loaders reject samples outside a plausible range
//! (default `[-40, 400]` C) so a corrupt file fails fast instead of
//! poisoning the threshold statistics downstream.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Plausible temperature range accepted by the thermal loaders, in C.
pub const DEFAULT_TEMP_RANGE_C: (f64, f64) = (-40.0, 400.0);

/// Static description of the thermal sensor a grid came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorMeta {
    /// Native sensor resolution (width, height).
    pub native_dims: (usize, usize),
    /// Spectral band the sensor responds to, in micrometres.
    pub spectral_band_um: (f64, f64),
}

impl Default for SensorMeta {
    /// An inexpensive 80x60 long-wave infrared module (8-14 um band).
    fn default() -> Self {
        SensorMeta {
            native_dims: (80, 60),
            spectral_band_um: (8.0, 14.0),
        }
    }
}

/// A row-major intensity grid with 1 (grayscale) or 3 (RGB) channels.
///
/// Samples are interleaved per pixel and always lie in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    width: usize,
    height: usize,
    channels: usize,
    samples: Vec<f64>,
}

impl ImageGrid {
    pub fn new(width: usize, height: usize, channels: usize, samples: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput(format!(
                "image dimensions must be at least 1x1, got {width}x{height}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidInput(format!(
                "image must have 1 or 3 channels, got {channels}"
            )));
        }
        if samples.len() != width * height * channels {
            return Err(Error::InvalidInput(format!(
                "sample count {} does not match {width}x{height}x{channels}",
                samples.len()
            )));
        }
        if samples.iter().any(|s| !(0.0..=1.0).contains(s)) {
            return Err(Error::InvalidInput(
                "image sample outside [0, 1]".to_string(),
            ));
        }
        Ok(ImageGrid {
            width,
            height,
            channels,
            samples,
        })
    }

    /// A grid filled with a constant value on every channel.
    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Result<Self> {
        ImageGrid::new(width, height, channels, vec![value; width * height * channels])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Sample one channel of one pixel.
    pub fn get(&self, x: usize, y: usize, channel: usize) -> f64 {
        self.samples[(y * self.width + x) * self.channels + channel]
    }

    pub fn set(&mut self, x: usize, y: usize, channel: usize, value: f64) {
        self.samples[(y * self.width + x) * self.channels + channel] = value;
    }

    /// Luma of one pixel: the sample itself for grayscale, Rec. 601
    /// weights (0.299, 0.587, 0.114) for RGB.
    pub fn luma(&self, x: usize, y: usize) -> f64 {
        if self.channels == 1 {
            self.get(x, y, 0)
        } else {
            0.299 * self.get(x, y, 0) + 0.587 * self.get(x, y, 1) + 0.114 * self.get(x, y, 2)
        }
    }

    /// Copy of this grid with three channels (grayscale replicated).
    pub fn to_rgb(&self) -> ImageGrid {
        if self.channels == 3 {
            return self.clone();
        }
        let mut samples = Vec::with_capacity(self.width * self.height * 3);
        for s in &self.samples {
            samples.extend_from_slice(&[*s, *s, *s]);
        }
        ImageGrid {
            width: self.width,
            height: self.height,
            channels: 3,
            samples,
        }
    }

    /// Loads an 8-bit PNG with 1 or 3 channels, normalizing to `[0, 1]`.
    pub fn from_png(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let img = image::open(path).map_err(|e| Error::Image {
            path: path.to_path_buf(),
            source: e,
        })?;
        let (width, height) = (img.width() as usize, img.height() as usize);
        let (samples, channels) = match img {
            image::DynamicImage::ImageLuma8(gray) => {
                (gray.as_raw().iter().map(|&v| v as f64 / 255.0).collect(), 1)
            }
            other => {
                let rgb = other.to_rgb8();
                (rgb.as_raw().iter().map(|&v| v as f64 / 255.0).collect(), 3)
            }
        };
        ImageGrid::new(width, height, channels, samples)
    }

    /// Writes the grid as an 8-bit PNG (grayscale or RGB), quantizing
    /// each sample with round(v * 255).
    pub fn write_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let quantize = |v: f64| (v * 255.0).round().clamp(0.0, 255.0) as u8;
        let bytes: Vec<u8> = self.samples.iter().map(|&v| quantize(v)).collect();
        let result = if self.channels == 1 {
            image::GrayImage::from_raw(self.width as u32, self.height as u32, bytes)
                .expect("buffer length checked by constructor")
                .save(path)
        } else {
            image::RgbImage::from_raw(self.width as u32, self.height as u32, bytes)
                .expect("buffer length checked by constructor")
                .save(path)
        };
        result.map_err(|e| Error::Image {
            path: path.to_path_buf(),
            source: e,
        })
    }
}

/// A row-major grid of temperature samples in degrees Celsius.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalGrid {
    width: usize,
    height: usize,
    temps: Vec<f64>,
    meta: SensorMeta,
}

impl ThermalGrid {
    pub fn new(width: usize, height: usize, temps: Vec<f64>, meta: SensorMeta) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput(format!(
                "thermal dimensions must be at least 1x1, got {width}x{height}"
            )));
        }
        if temps.len() != width * height {
            return Err(Error::InvalidInput(format!(
                "temperature count {} does not match {width}x{height}",
                temps.len()
            )));
        }
        if temps.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidInput(
                "thermal grid contains a non-finite sample".to_string(),
            ));
        }
        Ok(ThermalGrid {
            width,
            height,
            temps,
            meta,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn temps(&self) -> &[f64] {
        &self.temps
    }

    pub fn meta(&self) -> &SensorMeta {
        &self.meta
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.temps[y * self.width + x]
    }

    /// Median temperature; the robust ambient estimate used for warp fill
    /// and for the adaptive threshold.
    pub fn median(&self) -> f64 {
        median_of(&mut self.temps.clone())
    }

    /// Loads a CSV grid of Celsius values: `height` rows of `width`
    /// comma-separated numbers. Samples outside `range` are rejected.
    pub fn from_csv_with_range(path: impl AsRef<Path>, range: (f64, f64)) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let reader = BufReader::new(file);
        let mut temps = Vec::new();
        let mut width = None;
        let mut height = 0usize;
        for (row, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut count = 0usize;
            for (col, cell) in line.split(',').enumerate() {
                let value: f64 = cell.trim().parse().map_err(|_| {
                    Error::SchemaViolation(format!(
                        "{}: row {row}, column {col}: not a number: {cell:?}",
                        path.display()
                    ))
                })?;
                check_temp_range(value, range, path, row, col)?;
                temps.push(value);
                count += 1;
            }
            match width {
                None => width = Some(count),
                Some(w) if w != count => {
                    return Err(Error::SchemaViolation(format!(
                        "{}: row {row} has {count} columns, expected {w}",
                        path.display()
                    )));
                }
                Some(_) => {}
            }
            height += 1;
        }
        let width = width.ok_or_else(|| {
            Error::SchemaViolation(format!("{}: no rows", path.display()))
        })?;
        ThermalGrid::new(width, height, temps, SensorMeta::default())
    }

    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        ThermalGrid::from_csv_with_range(path, DEFAULT_TEMP_RANGE_C)
    }

    /// Writes the grid as CSV with shortest round-trip float formatting,
    /// so a re-read reproduces every sample bit for bit.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        for row in self.temps.chunks(self.width) {
            let line: Vec<String> = row.iter().map(|t| format!("{t}")).collect();
            writeln!(out, "{}", line.join(",")).map_err(|e| Error::io(path, e))?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }

    /// Loads a 16-bit single-channel PNG with a linear Celsius mapping
    /// `temp = offset_c + scale_c_per_unit * raw` declared in a JSON
    /// sidecar at `<path>.json`:
    ///
    /// ```json
    /// {"offset_c": -40.0, "scale_c_per_unit": 0.01}
    /// ```
    pub fn from_png16_with_range(path: impl AsRef<Path>, range: (f64, f64)) -> Result<Self> {
        let path = path.as_ref();
        let sidecar_path = {
            let mut os = path.as_os_str().to_owned();
            os.push(".json");
            std::path::PathBuf::from(os)
        };
        let sidecar_file = File::open(&sidecar_path).map_err(|e| Error::io(&sidecar_path, e))?;
        let sidecar: ThermalSidecar = serde_json::from_reader(BufReader::new(sidecar_file))
            .map_err(|e| Error::json(&sidecar_path, e))?;

        let img = image::open(path).map_err(|e| Error::Image {
            path: path.to_path_buf(),
            source: e,
        })?;
        let gray = match img {
            image::DynamicImage::ImageLuma16(g) => g,
            other => {
                return Err(Error::SchemaViolation(format!(
                    "{}: expected 16-bit single-channel PNG, got {:?}",
                    path.display(),
                    other.color()
                )));
            }
        };
        let (w, h) = (gray.width() as usize, gray.height() as usize);
        let mut temps = Vec::with_capacity(w * h);
        for (i, &raw) in gray.as_raw().iter().enumerate() {
            let value = sidecar.offset_c + sidecar.scale_c_per_unit * raw as f64;
            check_temp_range(value, range, path, i / w, i % w)?;
            temps.push(value);
        }
        ThermalGrid::new(w, h, temps, SensorMeta::default())
    }

    pub fn from_png16(path: impl AsRef<Path>) -> Result<Self> {
        ThermalGrid::from_png16_with_range(path, DEFAULT_TEMP_RANGE_C)
    }
}

#[derive(serde::Deserialize)]
struct ThermalSidecar {
    offset_c: f64,
    scale_c_per_unit: f64,
}

fn check_temp_range(
    value: f64,
    range: (f64, f64),
    path: &Path,
    row: usize,
    col: usize,
) -> Result<()> {
    if !value.is_finite() || value < range.0 || value > range.1 {
        return Err(Error::SchemaViolation(format!(
            "{}: row {row}, column {col}: temperature {value} outside plausible range [{}, {}]",
            path.display(),
            range.0,
            range.1
        )));
    }
    Ok(())
}

/// Median with the even-count convention of averaging the two middle
/// values. The slice is reordered in place.
pub(crate) fn median_of(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty());
    let mid = values.len() / 2;
    let (_, upper_mid, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    let upper_mid = *upper_mid;
    if values.len() % 2 == 1 {
        upper_mid
    } else {
        let (_, lower_mid, _) = values.select_nth_unstable_by(mid - 1, f64::total_cmp);
        (*lower_mid + upper_mid) / 2.0
    }
}
