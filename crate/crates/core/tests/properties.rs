//! Property suites for the spec'd invariants of each module.

mod common;

use heattrace_core::detection::{filter_confidence, Detection};
use heattrace_core::eval::{evaluate, GroundTruthObject};
use heattrace_core::fusion::{associate, Association};
use heattrace_core::geometry::{iou, union_bounds, Box2D, Point2D};
use heattrace_core::raster::{SensorMeta, ThermalGrid};
use heattrace_core::registration::{apply_map, fit_affine, warp_thermal, AffineMap, Correspondence};
use heattrace_core::thermal::{extract_contours, threshold_mask, HeatContour, ThresholdMode};
use proptest::prelude::*;

fn any_box() -> impl Strategy<Value = Box2D> {
    (0.0..200.0f64, 0.0..200.0f64, 0.0..80.0f64, 0.0..80.0f64)
        .prop_map(|(x, y, w, h)| Box2D::new(x, y, w, h))
}

fn integer_box() -> impl Strategy<Value = Box2D> {
    (0..60i32, 0..60i32, 1..50i32, 1..50i32)
        .prop_map(|(x, y, w, h)| Box2D::new(x as f64, y as f64, w as f64, h as f64))
}

fn positive_box() -> impl Strategy<Value = Box2D> {
    (0.0..200.0f64, 0.0..200.0f64, 1.0..80.0f64, 1.0..80.0f64)
        .prop_map(|(x, y, w, h)| Box2D::new(x, y, w, h))
}

fn small_grid() -> impl Strategy<Value = ThermalGrid> {
    (2usize..24, 2usize..24)
        .prop_flat_map(|(w, h)| {
            proptest::collection::vec(15.0..45.0f64, w * h)
                .prop_map(move |temps| ThermalGrid::new(w, h, temps, SensorMeta::default()).unwrap())
        })
}

fn small_mask_grid() -> impl Strategy<Value = (usize, usize, Vec<bool>)> {
    (2usize..64, 2usize..64)
        .prop_flat_map(|(w, h)| {
            proptest::collection::vec(proptest::bool::weighted(0.35), w * h)
                .prop_map(move |bits| (w, h, bits))
        })
}

proptest! {
    #[test]
    fn iou_is_symmetric(a in any_box(), b in any_box()) {
        prop_assert_eq!(iou(&a, &b).to_bits(), iou(&b, &a).to_bits());
    }

    #[test]
    fn iou_stays_in_unit_range(a in any_box(), b in any_box()) {
        let v = iou(&a, &b);
        prop_assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn iou_of_positive_box_with_itself_is_one(a in positive_box()) {
        prop_assert_eq!(iou(&a, &a), 1.0);
    }

    #[test]
    fn iou_matches_pixel_oracle_on_integer_boxes(a in integer_box(), b in integer_box()) {
        let continuous = iou(&a, &b);
        let discrete = common::pixel_iou(&a, &b, 115, 115);
        prop_assert!((continuous - discrete).abs() < 1e-9);
    }

    #[test]
    fn disjoint_boxes_share_no_interior_points(
        a in positive_box(),
        b in positive_box(),
        fx in 0.001..0.999f64,
        fy in 0.001..0.999f64,
    ) {
        prop_assume!(iou(&a, &b) == 0.0);
        let p = Point2D::new(a.x + fx * a.w, a.y + fy * a.h);
        prop_assert!(a.contains(p));
        prop_assert!(!b.contains(p));
    }

    #[test]
    fn union_bounds_covers_all_inputs(boxes in proptest::collection::vec(any_box(), 1..10)) {
        let hull = union_bounds(&boxes).unwrap();
        for b in &boxes {
            prop_assert!(hull.x <= b.x && hull.y <= b.y);
            prop_assert!(hull.right() >= b.right() && hull.bottom() >= b.bottom());
        }
    }

    #[test]
    fn affine_round_trip(
        a in 0.5..20.0f64, b in -3.0..3.0f64, c in -100.0..100.0f64,
        d in -3.0..3.0f64, e in 0.5..20.0f64, f in -100.0..100.0f64,
        px in -500.0..500.0f64, py in -500.0..500.0f64,
    ) {
        prop_assume!((a * e - b * d).abs() > 1e-3);
        let m = AffineMap::new([a, b, c, d, e, f], 0.0).unwrap();
        let inv = m.inverse().unwrap();
        let p = Point2D::new(px, py);
        let back = apply_map(&m, apply_map(&inv, p));
        prop_assert!((back.x - p.x).abs() < 1e-9);
        prop_assert!((back.y - p.y).abs() < 1e-9);
    }

    #[test]
    fn fit_on_exact_data_reproduces_the_transform(
        a in 0.5..20.0f64, b in -3.0..3.0f64, c in -100.0..100.0f64,
        d in -3.0..3.0f64, e in 0.5..20.0f64, f in -100.0..100.0f64,
        seed in 0..1000u64,
    ) {
        prop_assume!((a * e - b * d).abs() > 1e-3);
        let truth = AffineMap::new([a, b, c, d, e, f], 0.0).unwrap();
        let mut rng = heattrace_core::rng::SplitMix64::new(seed);
        let pairs: Vec<Correspondence> = (0..6)
            .map(|_| {
                let t = Point2D::new(rng.next_range(0.0, 79.0), rng.next_range(0.0, 59.0));
                Correspondence { thermal: t, rgb: apply_map(&truth, t) }
            })
            .collect();
        // Nearly-collinear draws make the fit ill-posed; skip them.
        prop_assume!(fit_affine(&pairs).is_ok());
        let fitted = fit_affine(&pairs).unwrap();
        for _ in 0..20 {
            let t = Point2D::new(rng.next_range(0.0, 79.0), rng.next_range(0.0, 59.0));
            let want = apply_map(&truth, t);
            let got = apply_map(&fitted, t);
            prop_assert!((got.x - want.x).abs() < 1e-6);
            prop_assert!((got.y - want.y).abs() < 1e-6);
        }
    }

    #[test]
    fn warp_preserves_temperature_range(
        grid in small_grid(),
        a in 0.5..4.0f64, b in -1.0..1.0f64, c in -10.0..10.0f64,
        d in -1.0..1.0f64, e in 0.5..4.0f64, f in -10.0..10.0f64,
    ) {
        prop_assume!((a * e - b * d).abs() > 1e-3);
        let m = AffineMap::new([a, b, c, d, e, f], 0.0).unwrap();
        let out = warp_thermal(&grid, &m, 30, 30).unwrap();
        let lo = grid.temps().iter().cloned().fold(f64::MAX, f64::min);
        let hi = grid.temps().iter().cloned().fold(f64::MIN, f64::max);
        let eps = 1e-9 * hi.abs().max(1.0);
        for &t in out.temps() {
            prop_assert!(t >= lo - eps && t <= hi + eps);
        }
    }

    #[test]
    fn mask_monotone_in_absolute_threshold(
        grid in small_grid(),
        t1 in 15.0..45.0f64,
        delta in 0.0..10.0f64,
    ) {
        let lower = threshold_mask(&grid, ThresholdMode::Absolute(t1)).unwrap();
        let upper = threshold_mask(&grid, ThresholdMode::Absolute(t1 + delta)).unwrap();
        for (a, b) in lower.bits().iter().zip(upper.bits()) {
            prop_assert!(*a || !*b, "raising the cutoff added a bit");
        }
    }

    #[test]
    fn contours_partition_the_mask((w, h, bits) in small_mask_grid()) {
        let temps: Vec<f64> = bits.iter().map(|&b| if b { 40.0 } else { 20.0 }).collect();
        let grid = ThermalGrid::new(w, h, temps, SensorMeta::default()).unwrap();
        let mask = threshold_mask(&grid, ThresholdMode::Absolute(30.0)).unwrap();
        let min_area = 2;
        let contours = extract_contours(&mask, &grid, min_area);

        // Oracle: independent min-label propagation.
        let oracle = common::flood_components(w, h, mask.bits());
        let oracle_kept: Vec<&Vec<usize>> =
            oracle.iter().filter(|c| c.len() >= min_area).collect();
        prop_assert_eq!(contours.len(), oracle_kept.len());

        let set_bits = mask.bits().iter().filter(|&&b| b).count();
        let total: usize = contours.iter().map(|c| c.pixel_count).sum();
        prop_assert!(total <= set_bits);

        // Pixel counts agree with the oracle's component sizes.
        let mut got: Vec<usize> = contours.iter().map(|c| c.pixel_count).collect();
        let mut want: Vec<usize> = oracle_kept.iter().map(|c| c.len()).collect();
        got.sort_unstable();
        want.sort_unstable();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn contour_extraction_is_deterministic((w, h, bits) in small_mask_grid()) {
        let temps: Vec<f64> = bits.iter().map(|&b| if b { 40.0 } else { 20.0 }).collect();
        let grid = ThermalGrid::new(w, h, temps, SensorMeta::default()).unwrap();
        let mask = threshold_mask(&grid, ThresholdMode::Absolute(30.0)).unwrap();
        let a = extract_contours(&mask, &grid, 1);
        let b = extract_contours(&mask, &grid, 1);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn confidence_filter_is_monotone(
        confs in proptest::collection::vec(0.0..=1.0f64, 0..20),
        t1 in 0.0..=1.0f64,
        t2 in 0.0..=1.0f64,
    ) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let dets: Vec<Detection> = confs
            .iter()
            .map(|&c| Detection {
                bbox: Box2D::new(0.0, 0.0, 10.0, 10.0),
                label: "object".into(),
                confidence: c,
            })
            .collect();
        let at_lo = filter_confidence(&dets, lo);
        let at_hi = filter_confidence(&dets, hi);
        prop_assert!(at_hi.len() <= at_lo.len());
        for d in &at_hi {
            prop_assert!(at_lo.iter().any(|o| o.confidence == d.confidence));
        }
    }

    #[test]
    fn association_is_deterministic_and_contained(
        centroids in proptest::collection::vec((0.0..300.0f64, 0.0..300.0f64), 1..8),
        n_dets in 1usize..8,
        fallback in proptest::bool::ANY,
    ) {
        let contours: Vec<HeatContour> = centroids
            .iter()
            .enumerate()
            .map(|(id, &(cx, cy))| HeatContour {
                id,
                pixel_count: 5,
                centroid: Point2D::new(cx, cy),
                bbox: Box2D::new(cx - 1.0, cy - 1.0, 2.0, 2.0),
                peak_temp: 33.0,
            })
            .collect();
        // Disjoint detection boxes on a 40-pixel grid.
        let dets: Vec<Detection> = (0..n_dets)
            .map(|i| Detection {
                bbox: Box2D::new((i % 8) as f64 * 40.0, (i / 8) as f64 * 40.0, 36.0, 36.0),
                label: "object".into(),
                confidence: 1.0,
            })
            .collect();
        let first = associate(&contours, &dets, fallback, 20.0);
        let second = associate(&contours, &dets, fallback, 20.0);
        prop_assert_eq!(&first, &second);

        for region in &first {
            prop_assert!(!region.source_contours.is_empty());
            if region.association == Association::EnclosingBox {
                for &cid in &region.source_contours {
                    let c = contours.iter().find(|c| c.id == cid).unwrap();
                    prop_assert!(region.bbox.contains(c.centroid));
                }
            }
        }

        // Coverage: with fallback every contour appears exactly once;
        // without, exactly the covered contours do.
        let mut seen: Vec<usize> = first.iter().flat_map(|r| r.source_contours.clone()).collect();
        seen.sort_unstable();
        let mut expected: Vec<usize> = contours
            .iter()
            .filter(|c| fallback || dets.iter().any(|d| d.bbox.contains(c.centroid)))
            .map(|c| c.id)
            .collect();
        expected.sort_unstable();
        prop_assert_eq!(seen, expected);
    }

    #[test]
    fn removing_a_detection_never_adds_enclosing_regions(
        centroids in proptest::collection::vec((0.0..320.0f64, 0.0..320.0f64), 1..10),
        n_dets in 1usize..9,
        removed in 0usize..9,
    ) {
        prop_assume!(removed < n_dets);
        let contours: Vec<HeatContour> = centroids
            .iter()
            .enumerate()
            .map(|(id, &(cx, cy))| HeatContour {
                id,
                pixel_count: 5,
                centroid: Point2D::new(cx, cy),
                bbox: Box2D::new(cx - 1.0, cy - 1.0, 2.0, 2.0),
                peak_temp: 33.0,
            })
            .collect();
        let dets: Vec<Detection> = (0..n_dets)
            .map(|i| Detection {
                bbox: Box2D::new((i % 8) as f64 * 40.0, (i / 8) as f64 * 40.0, 36.0, 36.0),
                label: "object".into(),
                confidence: 1.0,
            })
            .collect();
        let mut reduced = dets.clone();
        reduced.remove(removed);

        let count = |suspects: &[heattrace_core::SuspectRegion]| {
            suspects
                .iter()
                .filter(|s| s.association == Association::EnclosingBox)
                .count()
        };
        let before = count(&associate(&contours, &dets, false, 20.0));
        let after = count(&associate(&contours, &reduced, false, 20.0));
        prop_assert!(after <= before);
    }

    #[test]
    fn evaluate_is_scale_invariant_under_powers_of_two(
        truth_boxes in proptest::collection::vec(positive_box(), 1..6),
        suspect_boxes in proptest::collection::vec(positive_box(), 0..6),
        factor in prop_oneof![Just(0.5f64), Just(2.0f64), Just(8.0f64)],
    ) {
        let truth: Vec<GroundTruthObject> = truth_boxes
            .iter()
            .enumerate()
            .map(|(i, &bbox)| GroundTruthObject {
                name: format!("t{i}"),
                bbox,
                hides_camera: true,
            })
            .collect();
        let suspects: Vec<heattrace_core::SuspectRegion> = suspect_boxes
            .iter()
            .map(|&bbox| heattrace_core::SuspectRegion {
                bbox,
                label: "object".into(),
                association: Association::EnclosingBox,
                source_contours: vec![0],
            })
            .collect();
        let base = evaluate(&suspects, &truth, 0.05).unwrap();

        let scaled_truth: Vec<GroundTruthObject> = truth
            .iter()
            .map(|t| GroundTruthObject { bbox: t.bbox.scaled(factor), ..t.clone() })
            .collect();
        let scaled_suspects: Vec<heattrace_core::SuspectRegion> = suspects
            .iter()
            .map(|s| heattrace_core::SuspectRegion { bbox: s.bbox.scaled(factor), ..s.clone() })
            .collect();
        let scaled = evaluate(&scaled_suspects, &scaled_truth, 0.05).unwrap();

        // Power-of-two scaling is exact in floating point, so the whole
        // report matches bit for bit.
        prop_assert_eq!(base, scaled);
    }

    #[test]
    fn adding_a_suspect_never_lowers_best_iou(
        truth_boxes in proptest::collection::vec(positive_box(), 1..5),
        suspect_boxes in proptest::collection::vec(positive_box(), 1..5),
        extra in positive_box(),
    ) {
        let truth: Vec<GroundTruthObject> = truth_boxes
            .iter()
            .enumerate()
            .map(|(i, &bbox)| GroundTruthObject {
                name: format!("t{i}"),
                bbox,
                hides_camera: true,
            })
            .collect();
        let make = |boxes: &[Box2D]| -> Vec<heattrace_core::SuspectRegion> {
            boxes
                .iter()
                .map(|&bbox| heattrace_core::SuspectRegion {
                    bbox,
                    label: "object".into(),
                    association: Association::EnclosingBox,
                    source_contours: vec![0],
                })
                .collect()
        };
        let base = evaluate(&make(&suspect_boxes), &truth, 0.05).unwrap();
        let mut more_boxes = suspect_boxes.clone();
        more_boxes.push(extra);
        let more = evaluate(&make(&more_boxes), &truth, 0.05).unwrap();
        for (b, m) in base.per_target.iter().zip(&more.per_target) {
            prop_assert!(m.best_iou >= b.best_iou);
        }
    }

    #[test]
    fn report_aggregates_are_consistent(
        truth_boxes in proptest::collection::vec(positive_box(), 1..6),
        suspect_boxes in proptest::collection::vec(positive_box(), 0..6),
    ) {
        let truth: Vec<GroundTruthObject> = truth_boxes
            .iter()
            .enumerate()
            .map(|(i, &bbox)| GroundTruthObject {
                name: format!("t{i}"),
                bbox,
                hides_camera: true,
            })
            .collect();
        let suspects: Vec<heattrace_core::SuspectRegion> = suspect_boxes
            .iter()
            .map(|&bbox| heattrace_core::SuspectRegion {
                bbox,
                label: "object".into(),
                association: Association::EnclosingBox,
                source_contours: vec![0],
            })
            .collect();
        let report = evaluate(&suspects, &truth, 0.05).unwrap();
        prop_assert!(report.min_iou <= report.mean_iou + 1e-12);
        prop_assert!(report.mean_iou <= report.max_iou + 1e-12);
        let n = report.n_targets as f64;
        let steps = (report.accuracy * n).round();
        prop_assert!((report.accuracy - steps / n).abs() < 1e-12);
    }
}
