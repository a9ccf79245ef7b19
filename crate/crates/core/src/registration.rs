//! Fitting and applying the thermal-to-RGB coordinate mapping.
//!
//! The two sensors are rigidly co-mounted at matched orientation, so a
//! 6-DOF affine transform is sufficient and stays well conditioned with
//! only a handful of correspondences; a full homography is a possible
//! later upgrade. The fit is linear least squares on normalized
//! coordinates (centroid-shifted and scaled), which keeps the collinearity
//! test scale-free.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2D;
use crate::raster::ThermalGrid;

/// Determinants at or below this magnitude count as singular.
pub const SINGULAR_DET_EPS: f64 = 1e-12;

/// One calibration pair: a thermal-grid location and the RGB location it
/// should map to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correspondence {
    pub thermal: Point2D,
    pub rgb: Point2D,
}

/// An affine transform from thermal coordinates into RGB coordinates:
/// `(x, y) -> (a x + b y + c, d x + e y + f)` with coefficients stored as
/// `[a, b, c, d, e, f]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub coeffs: [f64; 6],
    /// Root-mean-square fit residual in RGB pixels:
    /// `sqrt(sum_i |map(thermal_i) - rgb_i|^2 / n)`. Zero for maps built
    /// analytically rather than fitted.
    pub residual_rms: f64,
}

impl AffineMap {
    pub fn new(coeffs: [f64; 6], residual_rms: f64) -> Result<Self> {
        let map = AffineMap {
            coeffs,
            residual_rms,
        };
        map.validate()?;
        Ok(map)
    }

    pub fn identity() -> Self {
        AffineMap {
            coeffs: [1.0, 0.0, 0.0, 0.0, 1.0, 0.0],
            residual_rms: 0.0,
        }
    }

    /// Pure anisotropic scaling about the origin.
    pub fn scale(sx: f64, sy: f64) -> Self {
        AffineMap {
            coeffs: [sx, 0.0, 0.0, 0.0, sy, 0.0],
            residual_rms: 0.0,
        }
    }

    /// Checks finiteness and invertibility of the linear part.
    pub fn validate(&self) -> Result<()> {
        if self.coeffs.iter().any(|c| !c.is_finite()) || !self.residual_rms.is_finite() {
            return Err(Error::InvalidInput(
                "affine map has non-finite coefficient".to_string(),
            ));
        }
        if self.determinant().abs() <= SINGULAR_DET_EPS {
            return Err(Error::DegenerateConfiguration(
                "affine map is not invertible".to_string(),
            ));
        }
        Ok(())
    }

    /// Determinant of the 2x2 linear part, `a e - b d`.
    pub fn determinant(&self) -> f64 {
        let [a, b, _, d, e, _] = self.coeffs;
        a * e - b * d
    }

    /// The inverse transform, computed in closed form.
    pub fn inverse(&self) -> Result<AffineMap> {
        let det = self.determinant();
        if det.abs() <= SINGULAR_DET_EPS {
            return Err(Error::DegenerateConfiguration(
                "affine map is not invertible".to_string(),
            ));
        }
        let [a, b, c, d, e, f] = self.coeffs;
        Ok(AffineMap {
            coeffs: [
                e / det,
                -b / det,
                (b * f - e * c) / det,
                -d / det,
                a / det,
                (d * c - a * f) / det,
            ],
            residual_rms: 0.0,
        })
    }

    /// Reads a map from its JSON form `{"coeffs": [...], "residual_rms": r}`,
    /// validating invariants.
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let map: AffineMap =
            serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::json(path, e))?;
        map.validate()?;
        Ok(map)
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

/// Applies the transform to one point.
pub fn apply_map(m: &AffineMap, p: Point2D) -> Point2D {
    let [a, b, c, d, e, f] = m.coeffs;
    Point2D::new(a * p.x + b * p.y + c, d * p.x + e * p.y + f)
}

/// Least-squares affine fit from thermal to RGB coordinates.
///
/// Needs at least 3 correspondences whose thermal points are not
/// collinear. With exactly 3 the result interpolates them exactly.
pub fn fit_affine(pairs: &[Correspondence]) -> Result<AffineMap> {
    if pairs.len() < 3 {
        return Err(Error::InsufficientCorrespondences(pairs.len()));
    }
    for pair in pairs {
        if !pair.thermal.is_finite() || !pair.rgb.is_finite() {
            return Err(Error::InvalidInput(
                "correspondence has non-finite coordinate".to_string(),
            ));
        }
    }

    // Normalize both sides (shift to centroid, scale to RMS distance
    // sqrt(2)) so the collinearity threshold does not depend on pixel
    // magnitudes.
    let thermal_norm = Normalization::fit(pairs.iter().map(|p| p.thermal));
    let rgb_norm = Normalization::fit(pairs.iter().map(|p| p.rgb));

    // Normal equations for the shared 3x3 Gram matrix of [x, y, 1].
    let mut gram = [[0.0f64; 3]; 3];
    let mut rhs_x = [0.0f64; 3];
    let mut rhs_y = [0.0f64; 3];
    for pair in pairs {
        let t = thermal_norm.apply(pair.thermal);
        let r = rgb_norm.apply(pair.rgb);
        let row = [t.x, t.y, 1.0];
        for i in 0..3 {
            for j in 0..3 {
                gram[i][j] += row[i] * row[j];
            }
            rhs_x[i] += row[i] * r.x;
            rhs_y[i] += row[i] * r.y;
        }
    }

    let sol_x = solve3(gram, rhs_x).ok_or_else(|| {
        Error::DegenerateConfiguration("thermal correspondence points are collinear".to_string())
    })?;
    let sol_y = solve3(gram, rhs_y).ok_or_else(|| {
        Error::DegenerateConfiguration("thermal correspondence points are collinear".to_string())
    })?;

    // Denormalize: map = rgb_norm^-1 . normalized_map . thermal_norm.
    let s_t = thermal_norm.scale;
    let s_r = rgb_norm.scale;
    let a = sol_x[0] * s_r / s_t;
    let b = sol_x[1] * s_r / s_t;
    let c = sol_x[2] * s_r - a * thermal_norm.cx - b * thermal_norm.cy + rgb_norm.cx;
    let d = sol_y[0] * s_r / s_t;
    let e = sol_y[1] * s_r / s_t;
    let f = sol_y[2] * s_r - d * thermal_norm.cx - e * thermal_norm.cy + rgb_norm.cy;

    let mut map = AffineMap {
        coeffs: [a, b, c, d, e, f],
        residual_rms: 0.0,
    };
    let sq_sum: f64 = pairs
        .iter()
        .map(|p| {
            let got = apply_map(&map, p.thermal);
            (got.x - p.rgb.x).powi(2) + (got.y - p.rgb.y).powi(2)
        })
        .sum();
    map.residual_rms = (sq_sum / pairs.len() as f64).sqrt();
    map.validate()?;
    Ok(map)
}

/// Resamples a thermal grid into RGB coordinates.
///
/// Every output pixel `(x, y)` is pulled through the inverse map and
/// bilinearly interpolated from the thermal grid, treating sample `(i, j)`
/// as located at coordinate `(i, j)`. Output pixels whose inverse image
/// falls outside the grid are filled with the configured ambient
/// temperature; [`warp_thermal`] uses the grid median.
pub fn warp_thermal(
    t: &ThermalGrid,
    m: &AffineMap,
    out_width: usize,
    out_height: usize,
) -> Result<ThermalGrid> {
    warp_thermal_with_fill(t, m, out_width, out_height, t.median())
}

pub fn warp_thermal_with_fill(
    t: &ThermalGrid,
    m: &AffineMap,
    out_width: usize,
    out_height: usize,
    fill: f64,
) -> Result<ThermalGrid> {
    let inv = m.inverse()?;
    let (tw, th) = (t.width(), t.height());
    let mut temps = Vec::with_capacity(out_width * out_height);
    for y in 0..out_height {
        for x in 0..out_width {
            let src = apply_map(&inv, Point2D::new(x as f64, y as f64));
            let inside = src.x >= 0.0
                && src.x <= (tw - 1) as f64
                && src.y >= 0.0
                && src.y <= (th - 1) as f64;
            if !inside {
                temps.push(fill);
                continue;
            }
            let x0 = src.x.floor() as usize;
            let y0 = src.y.floor() as usize;
            let x1 = (x0 + 1).min(tw - 1);
            let y1 = (y0 + 1).min(th - 1);
            let fx = src.x - x0 as f64;
            let fy = src.y - y0 as f64;
            let top = t.get(x0, y0) * (1.0 - fx) + t.get(x1, y0) * fx;
            let bottom = t.get(x0, y1) * (1.0 - fx) + t.get(x1, y1) * fx;
            temps.push(top * (1.0 - fy) + bottom * fy);
        }
    }
    ThermalGrid::new(out_width, out_height, temps, *t.meta())
}

/// Reads a JSON list of correspondences:
/// `[{"thermal": [x, y], "rgb": [x, y]}, ...]`.
pub fn load_correspondences(path: impl AsRef<Path>) -> Result<Vec<Correspondence>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::json(path, e))
}

/// Similarity normalization: shift to the centroid, scale so the RMS
/// distance from the origin is sqrt(2).
struct Normalization {
    cx: f64,
    cy: f64,
    /// Multiplying a centered coordinate by `1/scale` normalizes it;
    /// `scale` carries the denormalization.
    scale: f64,
}

impl Normalization {
    fn fit(points: impl Iterator<Item = Point2D> + Clone) -> Normalization {
        let n = points.clone().count() as f64;
        let (sx, sy) = points
            .clone()
            .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
        let (cx, cy) = (sx / n, sy / n);
        let rms = (points
            .map(|p| (p.x - cx).powi(2) + (p.y - cy).powi(2))
            .sum::<f64>()
            / n)
            .sqrt();
        let scale = if rms > 0.0 {
            rms / std::f64::consts::SQRT_2
        } else {
            1.0 // all points coincide; collinearity check will reject
        };
        Normalization { cx, cy, scale }
    }

    fn apply(&self, p: Point2D) -> Point2D {
        Point2D::new((p.x - self.cx) / self.scale, (p.y - self.cy) / self.scale)
    }
}

/// Gaussian elimination with partial pivoting on a 3x3 system. Returns
/// `None` when the matrix is singular at the fixed pivot threshold; on
/// normalized coordinates that corresponds to collinear input points.
fn solve3(mut m: [[f64; 3]; 3], mut rhs: [f64; 3]) -> Option<[f64; 3]> {
    const PIVOT_EPS: f64 = 1e-9;
    for col in 0..3 {
        let pivot_row = (col..3)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        if m[pivot_row][col].abs() < PIVOT_EPS {
            return None;
        }
        m.swap(col, pivot_row);
        rhs.swap(col, pivot_row);
        let pivot = m[col];
        for row in (col + 1)..3 {
            let factor = m[row][col] / pivot[col];
            for (dst, src) in m[row].iter_mut().zip(pivot).skip(col) {
                *dst -= factor * src;
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut sol = [0.0f64; 3];
    for row in (0..3).rev() {
        let mut acc = rhs[row];
        for k in (row + 1)..3 {
            acc -= m[row][k] * sol[k];
        }
        sol[row] = acc / m[row][row];
    }
    Some(sol)
}
