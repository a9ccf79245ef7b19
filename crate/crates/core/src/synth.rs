//! Deterministic generator of paired RGB/thermal scenes with ground
//! truth, for exercising the pipeline end to end without real captures.
//!
//! Objects are flat rectangles: the pipeline consumes only boxes and
//! heat, so richer rendering adds no test power. Camera-hiding objects
//! get a gaussian hot spot; detector misses are modeled by dropping a
//! seeded fraction of the oracle detections, hiders included.
//!
//! # Draw order
//!
//! Everything random flows from one [`SplitMix64`] stream seeded with
//! `spec.seed`, in this exact order:
//!
//! 1. Object placement, for each object index `i` in `0..n_objects`:
//!    repeated attempts of exactly four draws — `w`, `h` as
//!    `floor(next_range(size_min, size_max))`, then `x` as
//!    `floor(next_range(0, rgb_w - w))` and `y` likewise — until the
//!    candidate keeps a >= 4 px gap to every accepted box and, for the
//!    first `n_hiders` objects, its center keeps the hot-spot separation
//!    distance from every earlier hider center. After acceptance, one
//!    draw for the object's luma, `next_range(0.05, 0.65)`.
//! 2. Hot spots, for each hider in object order: two draws for an
//!    interior point of its box, inset by `min(8, side/4)` pixels.
//! 3. Distractor heat spots, when configured: two draws each for a
//!    position on the thermal grid.
//! 4. Sensor noise, when `thermal_noise_sigma > 0`: one gaussian (two
//!    draws) per thermal cell in row-major order.
//! 5. Detector dropout, when `round(detector_dropout * n_objects) > 0`:
//!    one Fisher-Yates shuffle of the object indices; the first `k`
//!    shuffled indices are dropped.
//!
//! The generating map takes the thermal coordinate extent exactly onto
//! the RGB extent (`scale = (rgb - 1) / (thermal - 1)` per axis), so no
//! RGB pixel falls outside thermal coverage and warped blobs are never
//! truncated by a coverage seam.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::detection::Detection;
use crate::error::{Error, Result};
use crate::eval::GroundTruthObject;
use crate::geometry::{Box2D, Point2D};
use crate::raster::{ImageGrid, SensorMeta, ThermalGrid};
use crate::registration::{apply_map, warp_thermal, AffineMap};
use crate::rng::SplitMix64;

/// Image id used for the detections file in a generated scene bundle.
pub const SCENE_IMAGE_ID: &str = "scene";
/// Background luma of generated RGB frames.
pub const BACKGROUND_LUMA: f64 = 0.85;
/// Object luma range; the upper end keeps at least 0.2 contrast against
/// the background.
pub const OBJECT_LUMA_RANGE: (f64, f64) = (0.05, 0.65);
/// Minimum gap kept between placed object boxes, in pixels.
pub const OBJECT_GAP: f64 = 4.0;
/// Hot spots are sampled at least this far inside their box (shrunk to
/// side/4 for small boxes), so a warped blob centroid cannot drift out.
pub const SPOT_MARGIN: f64 = 8.0;
/// Hider centers are kept `20 * sigma` thermal pixels apart (in RGB
/// units) so thresholded blobs never merge into one contour.
pub const HIDER_SEPARATION_SIGMAS: f64 = 20.0;
/// Placement attempts per object before giving up.
pub const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;

/// Default object names; the first five are the camera-hiding defaults.
pub const DEFAULT_OBJECT_NAMES: [&str; 22] = [
    "Toilet Paper Roll",
    "Toy Car",
    "Pill Bottle",
    "Wine Box",
    "Lamp",
    "Book",
    "PET Bottle",
    "Pouch (Snowman)",
    "Toy Mammoth",
    "Toy Frog",
    "Toy Box",
    "Clock",
    "Toy Horse",
    "Gum Bottle",
    "Toy Egg",
    "Glasses",
    "Banana",
    "Sponge",
    "Sunscreen",
    "Toy Buzzer",
    "Medicine Box",
    "Paper Roll",
];

/// Gaussian hot spot parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HotSpotSpec {
    /// Peak elevation above ambient, in C.
    pub delta_temp: f64,
    /// Gaussian sigma in thermal pixels.
    pub sigma: f64,
}

impl Default for HotSpotSpec {
    fn default() -> Self {
        HotSpotSpec {
            delta_temp: 12.0,
            sigma: 1.2,
        }
    }
}

/// Extra warm spots not tied to any object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistractorHeat {
    pub count: usize,
    pub delta_temp: f64,
}

/// Full description of a scene to generate. Serialized as `spec.json`
/// in a scene bundle; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneSpec {
    pub seed: u64,
    /// RGB frame size (width, height).
    pub rgb_dims: (usize, usize),
    /// Thermal grid size (width, height).
    pub thermal_dims: (usize, usize),
    pub n_objects: usize,
    pub n_hiders: usize,
    /// Object side length range in RGB pixels.
    pub object_size_range: (f64, f64),
    pub hot_spot: HotSpotSpec,
    /// Ambient temperature in C.
    pub ambient: f64,
    /// Per-cell gaussian sensor noise sigma in C; 0 disables noise.
    pub thermal_noise_sigma: f64,
    pub distractor_heat: Option<DistractorHeat>,
    /// Fraction of objects missing from the oracle detections.
    pub detector_dropout: f64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        SceneSpec {
            seed: 0,
            rgb_dims: (1280, 960),
            thermal_dims: (80, 60),
            n_objects: 22,
            n_hiders: 5,
            object_size_range: (40.0, 160.0),
            hot_spot: HotSpotSpec::default(),
            ambient: 21.0,
            thermal_noise_sigma: 0.3,
            distractor_heat: None,
            detector_dropout: 0.0,
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_hiders > self.n_objects {
            return Err(Error::InvalidInput(format!(
                "n_hiders {} exceeds n_objects {}",
                self.n_hiders, self.n_objects
            )));
        }
        if self.n_objects == 0 {
            return Err(Error::InvalidInput("n_objects must be at least 1".into()));
        }
        if self.thermal_dims.0 < 2 || self.thermal_dims.1 < 2 {
            return Err(Error::InvalidInput(
                "thermal dims must be at least 2x2".into(),
            ));
        }
        let (min_side, max_side) = self.object_size_range;
        if !(min_side.is_finite() && max_side.is_finite()) || min_side < 1.0 || max_side < min_side
        {
            return Err(Error::InvalidInput(format!(
                "invalid object size range [{min_side}, {max_side}]"
            )));
        }
        if (self.rgb_dims.0 as f64) <= max_side || (self.rgb_dims.1 as f64) <= max_side {
            return Err(Error::InvalidInput(format!(
                "rgb dims {:?} cannot fit objects up to {max_side} px",
                self.rgb_dims
            )));
        }
        if !(0.0..=1.0).contains(&self.detector_dropout) {
            return Err(Error::InvalidInput(format!(
                "detector_dropout {} outside [0, 1]",
                self.detector_dropout
            )));
        }
        if !self.hot_spot.delta_temp.is_finite()
            || !self.hot_spot.sigma.is_finite()
            || self.hot_spot.sigma <= 0.0
        {
            return Err(Error::InvalidInput("invalid hot spot parameters".into()));
        }
        if !self.ambient.is_finite() || self.thermal_noise_sigma < 0.0 {
            return Err(Error::InvalidInput("invalid thermal parameters".into()));
        }
        Ok(())
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let spec: SceneSpec = serde_json::from_reader(BufReader::new(file))
            .map_err(|e| Error::SchemaViolation(format!("{}: {e}", path.display())))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn write_json_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut writer = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut writer, self).map_err(|e| Error::json(path, e))?;
        writeln!(writer).map_err(|e| Error::io(path, e))
    }
}

/// A generated scene: paired rasters, annotations, oracle detections,
/// and the generating thermal-to-RGB transform.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthScene {
    pub spec: SceneSpec,
    pub rgb: ImageGrid,
    pub thermal: ThermalGrid,
    pub truth: Vec<GroundTruthObject>,
    pub oracle_detections: Vec<Detection>,
    pub map: AffineMap,
}

/// Generates a scene as a pure function of its spec: the same spec
/// yields bit-identical output.
pub fn generate_scene(spec: &SceneSpec) -> Result<SynthScene> {
    spec.validate()?;
    let (rgb_w, rgb_h) = spec.rgb_dims;
    let (th_w, th_h) = spec.thermal_dims;
    let map = AffineMap::scale(
        (rgb_w as f64 - 1.0) / (th_w as f64 - 1.0),
        (rgb_h as f64 - 1.0) / (th_h as f64 - 1.0),
    );
    let inv = map.inverse().expect("scale map is invertible");
    let mut rng = SplitMix64::new(spec.seed);

    // 1. Place objects; the first n_hiders placed are the hiders.
    let hider_sep = HIDER_SEPARATION_SIGMAS
        * spec.hot_spot.sigma
        * map.coeffs[0].max(map.coeffs[4]);
    let mut boxes: Vec<Box2D> = Vec::with_capacity(spec.n_objects);
    let mut lumas: Vec<f64> = Vec::with_capacity(spec.n_objects);
    for i in 0..spec.n_objects {
        let mut accepted = None;
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let w = rng
                .next_range(spec.object_size_range.0, spec.object_size_range.1)
                .floor();
            let h = rng
                .next_range(spec.object_size_range.0, spec.object_size_range.1)
                .floor();
            let x = rng.next_range(0.0, rgb_w as f64 - w).floor();
            let y = rng.next_range(0.0, rgb_h as f64 - h).floor();
            let candidate = Box2D::new(x, y, w, h);
            let dilated = candidate.dilate(OBJECT_GAP);
            if boxes.iter().any(|b| rects_overlap(&dilated, b)) {
                continue;
            }
            if i < spec.n_hiders {
                let cx = x + w / 2.0;
                let cy = y + h / 2.0;
                let too_close = boxes[..i].iter().any(|b| {
                    let dx = b.x + b.w / 2.0 - cx;
                    let dy = b.y + b.h / 2.0 - cy;
                    (dx * dx + dy * dy).sqrt() < hider_sep
                });
                if too_close {
                    continue;
                }
            }
            accepted = Some(candidate);
            break;
        }
        match accepted {
            Some(b) => boxes.push(b),
            None => {
                return Err(Error::SceneTooCrowded {
                    object: i,
                    attempts: MAX_PLACEMENT_ATTEMPTS,
                });
            }
        }
        lumas.push(rng.next_range(OBJECT_LUMA_RANGE.0, OBJECT_LUMA_RANGE.1));
    }

    // 2. Hot spots: one interior point per hider, mapped to thermal
    // coordinates through the inverse of the generating transform.
    let mut thermal_spots: Vec<(Point2D, f64)> = Vec::with_capacity(spec.n_hiders);
    for b in boxes.iter().take(spec.n_hiders) {
        let mx = SPOT_MARGIN.min(b.w / 4.0);
        let my = SPOT_MARGIN.min(b.h / 4.0);
        let px = rng.next_range(b.x + mx, b.x + b.w - mx);
        let py = rng.next_range(b.y + my, b.y + b.h - my);
        thermal_spots.push((
            apply_map(&inv, Point2D::new(px, py)),
            spec.hot_spot.delta_temp,
        ));
    }

    // 3. Distractor heat spots, directly in thermal coordinates.
    if let Some(dh) = &spec.distractor_heat {
        for _ in 0..dh.count {
            let tx = rng.next_range(0.0, th_w as f64 - 1.0);
            let ty = rng.next_range(0.0, th_h as f64 - 1.0);
            thermal_spots.push((Point2D::new(tx, ty), dh.delta_temp));
        }
    }

    // 4. Thermal field, then sensor noise in row-major order.
    let two_sigma_sq = 2.0 * spec.hot_spot.sigma * spec.hot_spot.sigma;
    let mut temps = Vec::with_capacity(th_w * th_h);
    for y in 0..th_h {
        for x in 0..th_w {
            let mut t = spec.ambient;
            for (center, delta) in &thermal_spots {
                let d2 = (x as f64 - center.x).powi(2) + (y as f64 - center.y).powi(2);
                t += delta * (-d2 / two_sigma_sq).exp();
            }
            temps.push(t);
        }
    }
    if spec.thermal_noise_sigma > 0.0 {
        for t in temps.iter_mut() {
            *t += rng.next_gaussian(spec.thermal_noise_sigma);
        }
    }
    let thermal = ThermalGrid::new(th_w, th_h, temps, SensorMeta::default())?;

    // 5. Oracle detections minus a seeded dropout.
    let drop_count = (spec.detector_dropout * spec.n_objects as f64).round() as usize;
    let dropped: HashSet<usize> = if drop_count > 0 {
        let mut indices: Vec<usize> = (0..spec.n_objects).collect();
        rng.shuffle(&mut indices);
        indices.into_iter().take(drop_count).collect()
    } else {
        HashSet::new()
    };
    let oracle_detections: Vec<Detection> = boxes
        .iter()
        .enumerate()
        .filter(|(i, _)| !dropped.contains(i))
        .map(|(_, b)| Detection {
            bbox: *b,
            label: "object".to_string(),
            confidence: 1.0,
        })
        .collect();

    // Render the RGB frame.
    let mut rgb = ImageGrid::filled(rgb_w, rgb_h, 3, BACKGROUND_LUMA)?;
    for (b, luma) in boxes.iter().zip(&lumas) {
        for y in b.y as usize..(b.y + b.h) as usize {
            for x in b.x as usize..(b.x + b.w) as usize {
                for ch in 0..3 {
                    rgb.set(x, y, ch, *luma);
                }
            }
        }
    }

    let truth: Vec<GroundTruthObject> = boxes
        .iter()
        .enumerate()
        .map(|(i, b)| GroundTruthObject {
            name: object_name(i),
            bbox: *b,
            hides_camera: i < spec.n_hiders,
        })
        .collect();

    Ok(SynthScene {
        spec: spec.clone(),
        rgb,
        thermal,
        truth,
        oracle_detections,
        map,
    })
}

/// True iff, for every hider, the warped thermal maximum inside its box
/// exceeds `ambient + delta_temp / 2`.
pub fn hot_spot_check(scene: &SynthScene) -> bool {
    let (rgb_w, rgb_h) = scene.spec.rgb_dims;
    let warped = warp_thermal(&scene.thermal, &scene.map, rgb_w, rgb_h)
        .expect("generating map is invertible");
    let cutoff = scene.spec.ambient + scene.spec.hot_spot.delta_temp / 2.0;
    for target in scene.truth.iter().filter(|t| t.hides_camera) {
        let b = target.bbox;
        let mut peak = f64::NEG_INFINITY;
        for y in b.y as usize..(b.y + b.h) as usize {
            for x in b.x as usize..(b.x + b.w) as usize {
                peak = peak.max(warped.get(x, y));
            }
        }
        if peak <= cutoff {
            return false;
        }
    }
    true
}

/// Default name for object index `i`.
pub fn object_name(i: usize) -> String {
    DEFAULT_OBJECT_NAMES
        .get(i)
        .map(|s| s.to_string())
        .unwrap_or_else(|| format!("Object {}", i + 1))
}

fn rects_overlap(a: &Box2D, b: &Box2D) -> bool {
    a.x < b.right() && b.x < a.right() && a.y < b.bottom() && b.y < a.bottom()
}

impl SynthScene {
    /// Writes the six-file scene bundle: `rgb.png`, `thermal.csv`,
    /// `truth.json`, `detections.json`, `map.json`, `spec.json`.
    pub fn write_bundle(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        self.rgb.write_png(dir.join("rgb.png"))?;
        self.thermal.write_csv(dir.join("thermal.csv"))?;
        crate::eval::write_truth(&self.truth, dir.join("truth.json"))?;
        crate::detection::write_detections_file(
            dir.join("detections.json"),
            SCENE_IMAGE_ID,
            &self.oracle_detections,
        )?;
        self.map.write_json_file(dir.join("map.json"))?;
        self.spec.write_json_file(dir.join("spec.json"))
    }
}
