//! Points, axis-aligned boxes, and the IoU metric.
//!
//! Boxes follow a half-open pixel convention: a box with corner `(x, y)`
//! and size `(w, h)` covers `[x, x+w) x [y, y+h)`, so adjacent boxes never
//! double-count a pixel. IoU is computed on continuous areas, which keeps
//! sub-pixel boxes from the affine warp exact; at integer coordinates it
//! agrees with discrete pixel counting.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A point in image space, in pixels. Serialized as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub fn new(x: f64, y: f64) -> Self {
        Point2D { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// An axis-aligned rectangle with top-left corner `(x, y)` and
/// non-negative size `(w, h)`. Serialized as `[x, y, w, h]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Box2D {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Box2D {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Box2D { x, y, w, h }
    }

    /// Checks the box invariants: finite fields and non-negative size.
    pub fn validate(&self) -> Result<()> {
        let fields = [self.x, self.y, self.w, self.h];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "box has non-finite field: {self:?}"
            )));
        }
        if self.w < 0.0 || self.h < 0.0 {
            return Err(Error::InvalidInput(format!(
                "box has negative size: {self:?}"
            )));
        }
        Ok(())
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    /// True iff `p` lies inside the box under the half-open convention:
    /// `x <= p.x < x+w` and `y <= p.y < y+h`.
    pub fn contains(&self, p: Point2D) -> bool {
        p.x >= self.x && p.x < self.right() && p.y >= self.y && p.y < self.bottom()
    }

    /// The box grown by `margin` on all four sides.
    pub fn dilate(&self, margin: f64) -> Box2D {
        Box2D::new(
            self.x - margin,
            self.y - margin,
            self.w + 2.0 * margin,
            self.h + 2.0 * margin,
        )
    }

    /// Uniform scaling of the box about the origin.
    pub fn scaled(&self, factor: f64) -> Box2D {
        Box2D::new(
            self.x * factor,
            self.y * factor,
            self.w * factor,
            self.h * factor,
        )
    }
}

/// Intersection over union of two boxes, on continuous areas.
///
/// Returns a value in `[0, 1]`; when the union has zero area (both boxes
/// degenerate) the result is defined as 0. All three areas are computed
/// from edge differences so that identical boxes score exactly 1.
pub fn iou(a: &Box2D, b: &Box2D) -> f64 {
    let ix = (a.right().min(b.right()) - a.x.max(b.x)).max(0.0);
    let iy = (a.bottom().min(b.bottom()) - a.y.max(b.y)).max(0.0);
    let intersection = ix * iy;
    let area_a = (a.right() - a.x) * (a.bottom() - a.y);
    let area_b = (b.right() - b.x) * (b.bottom() - b.y);
    let union = area_a + area_b - intersection;
    if union <= 0.0 {
        return 0.0;
    }
    intersection / union
}

/// Smallest axis-aligned box covering every input box.
///
/// Errors with [`Error::EmptyBoxSet`] on an empty slice.
pub fn union_bounds(boxes: &[Box2D]) -> Result<Box2D> {
    let first = boxes.first().ok_or(Error::EmptyBoxSet)?;
    let mut min_x = first.x;
    let mut min_y = first.y;
    let mut max_x = first.right();
    let mut max_y = first.bottom();
    for b in &boxes[1..] {
        min_x = min_x.min(b.x);
        min_y = min_y.min(b.y);
        max_x = max_x.max(b.right());
        max_y = max_y.max(b.bottom());
    }
    Ok(Box2D::new(
        min_x,
        min_y,
        covering_extent(min_x, max_x),
        covering_extent(min_y, max_y),
    ))
}

/// Smallest width such that `lo + width >= hi` despite rounding in the
/// subtraction.
fn covering_extent(lo: f64, hi: f64) -> f64 {
    let mut extent = hi - lo;
    while lo + extent < hi {
        extent = extent.next_up();
    }
    extent
}

impl Serialize for Point2D {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        [self.x, self.y].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Point2D {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let [x, y] = <[f64; 2]>::deserialize(deserializer)?;
        let p = Point2D::new(x, y);
        if !p.is_finite() {
            return Err(D::Error::custom("point has non-finite coordinate"));
        }
        Ok(p)
    }
}

impl Serialize for Box2D {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        [self.x, self.y, self.w, self.h].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Box2D {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let [x, y, w, h] = <[f64; 4]>::deserialize(deserializer)?;
        let b = Box2D::new(x, y, w, h);
        b.validate().map_err(D::Error::custom)?;
        Ok(b)
    }
}
