//! Independent oracles shared by the property and acceptance suites.
//!
//! These deliberately avoid the library's own algorithms: IoU is
//! recomputed by counting lattice pixels, and connected components by
//! min-label propagation to a fixpoint.

#![allow(dead_code)]

use heattrace_core::geometry::Box2D;

/// Discrete IoU for integer-coordinate boxes: counts canvas pixels whose
/// half-open cells fall in each box.
pub fn pixel_iou(a: &Box2D, b: &Box2D, canvas_w: usize, canvas_h: usize) -> f64 {
    let in_box = |bx: &Box2D, x: usize, y: usize| {
        let (x, y) = (x as f64, y as f64);
        x >= bx.x && x < bx.x + bx.w && y >= bx.y && y < bx.y + bx.h
    };
    let mut intersection = 0u64;
    let mut union = 0u64;
    for y in 0..canvas_h {
        for x in 0..canvas_w {
            let ia = in_box(a, x, y);
            let ib = in_box(b, x, y);
            if ia && ib {
                intersection += 1;
            }
            if ia || ib {
                union += 1;
            }
        }
    }
    if union == 0 {
        0.0
    } else {
        intersection as f64 / union as f64
    }
}

/// 8-connected components by min-label propagation: every set pixel
/// starts labeled with its own index and repeatedly adopts the smallest
/// neighboring label until nothing changes. Returns each component's
/// pixel indices, ascending, ordered by smallest member.
pub fn flood_components(width: usize, height: usize, bits: &[bool]) -> Vec<Vec<usize>> {
    assert_eq!(bits.len(), width * height);
    let mut labels: Vec<usize> = (0..bits.len()).collect();
    loop {
        let mut changed = false;
        for y in 0..height {
            for x in 0..width {
                let i = y * width + x;
                if !bits[i] {
                    continue;
                }
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        let nx = x as i64 + dx;
                        let ny = y as i64 + dy;
                        if nx < 0 || ny < 0 || nx >= width as i64 || ny >= height as i64 {
                            continue;
                        }
                        let j = ny as usize * width + nx as usize;
                        if bits[j] && labels[j] < labels[i] {
                            labels[i] = labels[j];
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut by_root: std::collections::BTreeMap<usize, Vec<usize>> = std::collections::BTreeMap::new();
    for (i, &set) in bits.iter().enumerate() {
        if set {
            by_root.entry(labels[i]).or_default().push(i);
        }
    }
    by_root.into_values().collect()
}

#[cfg(test)]
mod oracle_tests {
    use super::*;

    #[test]
    fn pixel_iou_matches_hand_count() {
        let a = Box2D::new(0.0, 0.0, 10.0, 10.0);
        let b = Box2D::new(5.0, 0.0, 10.0, 10.0);
        // 30x30 canvas: intersection 50 pixels, union 150.
        assert!((pixel_iou(&a, &b, 30, 30) - 50.0 / 150.0).abs() < 1e-15);
    }

    #[test]
    fn flood_oracle_joins_diagonals() {
        let bits = vec![
            true, false, false, //
            false, true, false, //
            false, false, true,
        ];
        let comps = flood_components(3, 3, &bits);
        assert_eq!(comps, vec![vec![0, 4, 8]]);
    }
}
